use std::io::Write;

use biosec::numerics::sci;
use biosec::{BigReal, Context};
use rug::Integer;
use serde_json::{Map, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A real as a JSON number token, or a string for non-finite values.
pub fn real(x: &BigReal) -> Value {
    let text = sci(x);
    match text.parse::<Number>() {
        Ok(n) if x.is_finite() => Value::Number(n),
        _ => Value::String(text),
    }
}

/// A magnitude with a `log10` companion for values far outside f64 range.
pub fn magnitude(ctx: &Context, x: &BigReal) -> Value {
    let mut m = Map::new();
    m.insert("value".into(), real(x));
    let log10 = if x.is_zero() {
        Value::String("-inf".into())
    } else {
        real(&ctx.log10(&x.clone().abs()))
    };
    m.insert("log10".into(), log10);
    Value::Object(m)
}

pub fn integer(n: &Integer) -> Value {
    Value::Number(n.to_string().parse().expect("integer literal is a JSON number"))
}

/// Ordered record of one command's result.
pub struct Record {
    fields: Map<String, Value>,
}

impl Record {
    pub fn new(command: &str, ctx: &Context) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), Value::String(command.into()));
        fields.insert("precision_bits".into(), Value::from(ctx.precision()));
        Record { fields }
    }

    pub fn inputs(&mut self, inputs: Map<String, Value>) -> &mut Self {
        self.fields.insert("inputs".into(), Value::Object(inputs));
        self
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.into(), value.into());
        self
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.fields)
    }
}

pub fn write(out: &mut dyn Write, format: Format, value: &Value) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, value)?;
            writeln!(out)
        }
        Format::Csv => write_csv(out, value),
    }
}

/// Flattens the record into a header row and one value row. Array-valued
/// fields of objects become extra rows sharing the scalar columns.
fn write_csv(out: &mut dyn Write, value: &Value) -> std::io::Result<()> {
    let mut scalars = Vec::new();
    let mut table: Option<(String, &Vec<Value>)> = None;
    if let Value::Object(map) = value {
        for (k, v) in map {
            match v {
                Value::Array(items) if items.iter().all(Value::is_object) && table.is_none() => {
                    table = Some((k.clone(), items));
                }
                _ => flatten(k, v, &mut scalars),
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    match table {
        None => {
            w.write_record(scalars.iter().map(|(k, _)| k))?;
            w.write_record(scalars.iter().map(|(_, v)| v))?;
        }
        Some((name, items)) => {
            let rows: Vec<Vec<(String, String)>> = items
                .iter()
                .map(|item| {
                    let mut cells = Vec::new();
                    flatten(&name, item, &mut cells);
                    cells
                })
                .collect();
            let header = scalars.iter().chain(rows.first().into_iter().flatten()).map(|(k, _)| k);
            w.write_record(header)?;
            for row in &rows {
                w.write_record(scalars.iter().chain(row).map(|(_, v)| v))?;
            }
        }
    }
    w.flush()
}

fn flatten(prefix: &str, v: &Value, acc: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if k == "value" { prefix.to_string() } else { format!("{prefix}.{k}") };
                flatten(&key, inner, acc);
            }
        }
        Value::String(s) => acc.push((prefix.into(), s.clone())),
        Value::Null => acc.push((prefix.into(), String::new())),
        Value::Array(items) => {
            let joined = items.iter().map(scalar_text).collect::<Vec<_>>().join(";");
            acc.push((prefix.into(), joined));
        }
        other => acc.push((prefix.into(), scalar_text(other))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
