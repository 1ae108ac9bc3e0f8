use fractal_hh::special::{gamma, gamma_ratio, log_gamma, parse_reference_table};

const TABLE: &str = include_str!("../data/gamma_reference.txt");

#[test]
fn gamma_matches_reference_table() {
    let rows = parse_reference_table(TABLE).unwrap();
    assert!(rows.len() > 200);
    let mut worst = 0.0f64;
    for &(x, want) in &rows {
        let got = gamma(x).unwrap();
        let rel = ((got - want) / want).abs();
        worst = worst.max(rel);
        assert!(rel <= 1e-13, "gamma({x}) = {got:e}, want {want:e}, rel {rel:e}");
    }
    println!("worst relative error over {} points: {worst:e}", rows.len());
}

#[test]
fn log_gamma_matches_reference_table() {
    for (x, want) in parse_reference_table(TABLE).unwrap() {
        let got = log_gamma(x).unwrap().exp();
        assert!(((got - want) / want).abs() <= 1e-12, "x = {x}");
    }
}

#[test]
fn ratios_match_reference_table() {
    let rows = parse_reference_table(TABLE).unwrap();
    for w in rows.windows(7).step_by(3) {
        let (p, gp) = w[0];
        let (q, gq) = w[6];
        let got = gamma_ratio(p, q).unwrap();
        assert!(((got - gp / gq) / (gp / gq)).abs() <= 1e-12, "p = {p}, q = {q}");
    }
}
