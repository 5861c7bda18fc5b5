//! Reference values computed independently (mpmath at 40 digits, closed forms)
//! and frozen before the solver existed. Regenerate with `tools/oracles.py`.

#![allow(dead_code)]

pub const SANDSTONE_D: f64 = 25.6e9;
pub const SANDSTONE_G: f64 = 16.2e9;
pub const SANDSTONE_K: f64 = 4.0e9;

pub const CLAY_SHALE_D: f64 = 57.699999999999999e9;
pub const CLAY_SHALE_G: f64 = 15.066666666666668e9;
pub const CLAY_SHALE_K: f64 = 37.6111111111111e9;

/// `r11, r12, r13, r33` for sandstone in 1/GPa.
pub const SANDSTONE_COMPLIANCE: [f64; 4] =
    [0.048659770881993101, -0.01306862417973529, -0.01306862417973529, 0.048659770881993101];

/// First `T` coefficient of sandstone, 1/s.
pub const SANDSTONE_T1: f64 = -28.80184331797235;

pub const LAMBDA_MAX: [(&str, f64); 4] = [
    ("clay_shale", 5070.9255283710992),
    ("phenolic", 3571.6380332375798),
    ("sandstone", 3671.5119501371639),
    ("sandstone_iso", 3200.0),
];

/// `(Re z, Im z, Re H0, Im H0, Re H1, Im H1)` for second-kind Hankel functions.
pub const HANKEL2: [[f64; 6]; 7] = [
    [0.3, 0.0, 0.9776262465382961, 0.8072735778045195, 0.148318816273104, 2.2931051383885293],
    [2.5, -0.1, -0.03497928707522182, -0.4505071597103541, 0.4546850715515781, -0.12264995084807491],
    [7.0, -0.4, 0.20021626256742334, 0.02304792360299263, -0.00906466034447272, 0.20313782013941023],
    [11.9, -0.02, 0.02436399911198889, 0.2252986354700641, -0.2244893619689115, 0.03383628824429142],
    [12.1, -0.02, 0.06810940749728651, 0.21416551259993907, -0.21155149130037953, 0.07700599209918942],
    [25.0, -1.5, 0.02059595695168027, 0.02898868418397674, -0.028619233807798964, 0.02120140030137188],
    [140.0, -3.0, 0.0018895366400430407, -0.00277455436266456, 0.0027815289106535106, 0.0018797895174704204],
];

/// Viscoelastic sandstone plane-wave frequencies: `(k1, k3, Re wP, Im wP, Re wS, Im wS)`.
pub const SANDSTONE_PLANE_WAVE: [[f64; 6]; 2] = [
    [
        std::f64::consts::PI / 1000.0,
        std::f64::consts::PI / 1000.0,
        15.711035158520287,
        0.03185552934675625,
        6.907981460031375,
        0.026791020206301298,
    ],
    [2.0 * std::f64::consts::PI, 0.0, 20105.991733200706, 14.422802926428117, 15994.048848730381, 19.23475660914183],
];

/// Elastic Green's function with `rho cp^2 = 25.6 GPa`, `rho cs^2 = 16.2 GPa`,
/// `rho = 2500`, receiver at `(250, 250)` m: `(w, Re u1, Im u1, Re u3, Im u3)`.
pub const ELASTIC_GREENS: [[f64; 5]; 3] = [
    [50.0, 1.9415905920514563e-12, 1.7494678131469297e-12, 1.9844378904553826e-12, -2.316795155962252e-12],
    [300.0, -6.517745652249799e-13, -1.3162306767423173e-12, -5.108401189422352e-13, 5.542617804121864e-13],
    [1500.0, -2.129003457198299e-13, 4.232013416158329e-13, -3.8828600159642644e-13, -4.153063515183141e-13],
];

/// Slope labels of the penalty-flux convergence plot for `N = 1, 2, 3`.
pub const PENALTY_RATES: [f64; 3] = [1.83, 2.95, 3.93];
/// Central-flux slopes for `N = 2, 3`.
pub const CENTRAL_RATES: [f64; 2] = [2.10, 2.97];
