//! Bound constants for three parameter sets, computed independently with 40-digit
//! arbitrary-precision arithmetic (mpmath) directly from the closed-form expressions.
#![allow(clippy::excessive_precision, dead_code)]

use sgula_core::constants::ProblemParams;

pub fn params(v: [f64; 10], d: usize, eps: Option<f64>) -> ProblemParams<f64> {
    ProblemParams {
        m: v[0],
        l: v[1],
        k: v[2],
        mu: v[3],
        r: v[4],
        h0_norm: v[5],
        beta: v[6],
        d,
        e_theta0_sq: v[8],
        lambda: v[9],
        epsilon_w2: eps,
    }
}

// (m=0, L=1, K=1, mu=1, R=1, |h(0)|=0, beta=1, d=1, E|theta0|^2=0, lambda=0.1, eps=0.1)
pub const SET_A: &[(&str, f64)] = &[
    ("b", 1.5),
    ("lambda0", 0.5),
    ("C1", 10.0),
    ("C2", 6.2500000000000000867),
    ("C3", 29.000000000000000347),
    ("C4", 62.000000000000000694),
    ("C5", 34.000000000000000347),
    ("C6", 151.04936031468391825),
    ("C7", 11338.39070518411568),
    ("C8", 107440142286.50956691),
    ("C9", 6427.4629195809362076),
    ("C_W1", 2.2662969061336526337),
    ("C_r1", 0.061313240195240386933),
    ("C0_prime", 0.030656620097620193466),
    ("C_W2", 164563.53295361660239),
    ("C_r2", 0.00046277102329672383847),
    ("C0_doubleprime", 3621.5183898472414504),
    ("C_W2_star", 5.0),
    ("C_r3", 0.25),
    ("C_T1", 11489.440065498799598),
    ("C_T2", 107440142437.55892722),
    ("C_T3", 6578.5122798956201258),
    ("C_script_T1", 1.2247448713915890491),
    ("M", 2.3660254037844386468),
    ("S_d", 2.0),
    ("epsilon_w2", 0.10000000000000000555),
];

// max-quadratic constants in d=2 (m=1, L=1, K=1, mu=0.5, R=2 sqrt 2, beta=1, E|theta0|^2=2, lambda=0.01, default eps)
pub const SET_B: &[(&str, f64)] = &[
    ("b", 12.828427124746191658),
    ("lambda0", 0.25),
    ("C1", 118.62741699796953326),
    ("C2", 62.826779686442465297),
    ("C3", 161.56694921610616324),
    ("C4", 170.56694921610616324),
    ("C5", 191.22380346559854656),
    ("C6", 496.95539500121068458),
    ("C7", 200785.73321516339917),
    ("C8", 8.6974257653865140644e+12),
    ("C9", 17876.612078844432635),
    ("C_W1", 5.436563656918091214),
    ("C_r1", 0.02709426872771446874),
    ("C0_prime", 0.01354713436385723437),
    ("C_W2", 813601.49215952930678),
    ("C_r2", 9.2977637327154128573e-5),
    ("C0_doubleprime", 7447.536319806130594),
    ("C_W2_star", 2.1794494717703367761),
    ("C_r3", 0.125),
    ("C_T1", 201282.68861016460986),
    ("C_T2", 8.6974257658834694594e+12),
    ("C_T3", 18373.56747384564332),
    ("C_script_T1", 5.5902018257027375322),
    ("M", 6.0816793721306478298),
    ("S_d", 6.2831853071795864769),
    ("epsilon_w2", 0.08838834764831844055),
];

// (m=0.5, L=2, K=0.25, mu=1.5, R=0.8, |h(0)|=1.2, beta=4, d=3, E|theta0|^2=1, lambda=0.05, default eps)
pub const SET_C: &[(&str, f64)] = &[
    ("b", 2.1600000000000002176),
    ("lambda0", 0.1875),
    ("C1", 7.7600000000000005803),
    ("C2", 5.3761363636363641405),
    ("C3", 17.995738636363637939),
    ("C4", 57.174715909090913817),
    ("C5", 23.815738636363638374),
    ("C6", 56.759427297689591528),
    ("C7", 2736.1711792631243004),
    ("C8", 82218704.289153707966),
    ("C9", 607.23079261800040624),
    ("C_W1", 2.1665741353499171281),
    ("C_r1", 0.091969860292860580399),
    ("C0_prime", 0.1839397205857211608),
    ("C_W2", 2668.1754071092441839),
    ("C_r2", 0.0036873302335580363639),
    ("C0_doubleprime", 245.68253204802353968),
    ("C_W2_star", 1.8291020368723831027),
    ("C_r3", 0.375),
    ("C_T1", 2792.9306065608138919),
    ("C_T2", 82218761.048581005656),
    ("C_T3", 663.99021991568999777),
    ("C_script_T1", 3.7090722034374522205),
    ("M", 5.197056274847714144),
    ("S_d", 12.566370614359172954),
    ("epsilon_w2", 0.5303300858899106433),
];

/// `(label, parameters, expected constants in report order)`.
pub fn cases() -> Vec<(&'static str, ProblemParams<f64>, &'static [(&'static str, f64)])> {
    let r = 2.0 * std::f64::consts::SQRT_2;
    vec![
        ("unit", params([0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.1], 1, Some(0.1)), SET_A),
        ("max_quadratic", params([1.0, 1.0, 1.0, 0.5, r, 0.0, 1.0, 0.0, 2.0, 0.01], 2, None), SET_B),
        ("mixed", params([0.5, 2.0, 0.25, 1.5, 0.8, 1.2, 4.0, 0.0, 1.0, 0.05], 3, None), SET_C),
    ]
}

/// Largest relative deviation of the computed report from `expected`, or an error
/// when labels differ.
pub fn max_rel_error(p: &ProblemParams<f64>, expected: &[(&str, f64)]) -> Result<f64, String> {
    let report = sgula_core::constants::constants_report(p).map_err(|e| e.to_string())?;
    let got = report.entries();
    if got.len() != expected.len() {
        return Err(format!("{} constants, expected {}", got.len(), expected.len()));
    }
    let mut worst = 0.0f64;
    for ((name, value, _), (ename, evalue)) in got.iter().zip(expected) {
        if name != ename {
            return Err(format!("label {name} where {ename} was expected"));
        }
        worst = worst.max(((value - evalue) / evalue).abs());
    }
    Ok(worst)
}
