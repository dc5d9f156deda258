//! Reference quantiles of the Student-t distribution, as commonly tabulated
//! (three decimals). Used to validate [`super::t_quantile`].

/// Column headers: one-sided significance level. The quantile in column `j`
/// is `t_quantile(df, 1 - T_TABLE_SIGNIFICANCE[j])`.
pub const T_TABLE_SIGNIFICANCE: [f64; 8] = [0.25, 0.20, 0.15, 0.10, 0.05, 0.025, 0.01, 0.005];

/// Row degrees of freedom; `None` is the limiting (normal) row.
pub const T_TABLE: [(Option<u64>, [f64; 8]); 24] = [
    (Some(1), [1.000, 1.376, 1.963, 3.078, 6.314, 12.706, 31.821, 63.657]),
    (Some(2), [0.816, 1.061, 1.386, 1.886, 2.920, 4.303, 6.965, 9.925]),
    (Some(3), [0.765, 0.978, 1.250, 1.638, 2.353, 3.182, 4.541, 5.841]),
    (Some(4), [0.741, 0.941, 1.190, 1.533, 2.132, 2.776, 3.747, 4.604]),
    (Some(5), [0.727, 0.920, 1.156, 1.476, 2.015, 2.571, 3.365, 4.032]),
    (Some(6), [0.718, 0.906, 1.134, 1.440, 1.943, 2.447, 3.143, 3.707]),
    (Some(7), [0.711, 0.896, 1.119, 1.415, 1.895, 2.365, 2.998, 3.499]),
    (Some(8), [0.706, 0.889, 1.108, 1.397, 1.860, 2.306, 2.896, 3.355]),
    (Some(9), [0.703, 0.883, 1.100, 1.383, 1.833, 2.262, 2.821, 3.250]),
    (Some(10), [0.700, 0.879, 1.093, 1.372, 1.812, 2.228, 2.764, 3.169]),
    (Some(20), [0.687, 0.860, 1.064, 1.325, 1.725, 2.086, 2.528, 2.845]),
    (Some(30), [0.683, 0.854, 1.055, 1.310, 1.697, 2.042, 2.457, 2.750]),
    (Some(40), [0.681, 0.851, 1.050, 1.303, 1.684, 2.021, 2.423, 2.704]),
    (Some(50), [0.679, 0.849, 1.047, 1.299, 1.676, 2.009, 2.403, 2.678]),
    (Some(60), [0.679, 0.848, 1.045, 1.296, 1.671, 2.000, 2.390, 2.660]),
    (Some(70), [0.678, 0.847, 1.044, 1.294, 1.667, 1.994, 2.381, 2.648]),
    (Some(80), [0.678, 0.846, 1.043, 1.292, 1.664, 1.990, 2.374, 2.639]),
    (Some(90), [0.677, 0.846, 1.042, 1.291, 1.662, 1.987, 2.368, 2.632]),
    (Some(100), [0.677, 0.845, 1.042, 1.290, 1.660, 1.984, 2.364, 2.626]),
    (Some(500), [0.675, 0.842, 1.038, 1.283, 1.648, 1.965, 2.334, 2.586]),
    (Some(1000), [0.675, 0.842, 1.037, 1.282, 1.646, 1.962, 2.330, 2.581]),
    (Some(5000), [0.675, 0.842, 1.037, 1.282, 1.645, 1.960, 2.327, 2.577]),
    (Some(10000), [0.675, 0.842, 1.036, 1.282, 1.645, 1.960, 2.327, 2.576]),
    (None, [0.674, 0.842, 1.036, 1.282, 1.645, 1.960, 2.326, 2.576]),
];
