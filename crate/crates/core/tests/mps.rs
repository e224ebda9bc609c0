//! MPS export: frozen golden file plus a re-import through a small parser.

use std::collections::HashMap;

use sepnmf_core::lp_build::{build_hottopixx, build_rho_lp, Row, Sense, StandardLp};
use sepnmf_core::matcore::normalize_columns_l1;
use sepnmf_core::{solve, DenseMatrix, SolveOptions};

const GOLDEN: &str = "tests/data/rho_lp_2x3.mps";

fn small_spec_lp() -> StandardLp {
    let m = DenseMatrix::from_rows(&[&[0.75, 0.0, 0.375], &[0.25, 1.0, 0.625]]).unwrap();
    build_rho_lp(&m, 2.0, 0.05, &[1.0, 1.001, 0.999]).unwrap().assemble()
}

#[test]
fn golden_file_is_stable() {
    let text = small_spec_lp().to_mps();
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(GOLDEN);
    if std::env::var_os("SEPNMF_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden MPS file present");
    assert_eq!(text, golden);
}

/// Parsed fixed-format MPS: names, senses, coefficients, bounds.
struct Parsed {
    rows: Vec<(String, char)>,
    vars: Vec<String>,
    objective: HashMap<String, f64>,
    coeffs: HashMap<(String, String), f64>,
    rhs: HashMap<String, f64>,
    lower: HashMap<String, f64>,
    upper: HashMap<String, f64>,
}

fn parse_mps(text: &str) -> Parsed {
    let mut p = Parsed {
        rows: Vec::new(),
        vars: Vec::new(),
        objective: HashMap::new(),
        coeffs: HashMap::new(),
        rhs: HashMap::new(),
        lower: HashMap::new(),
        upper: HashMap::new(),
    };
    let mut section = "";
    let mut obj_row = String::new();
    for line in text.lines() {
        if !line.starts_with(' ') {
            section = line.split_whitespace().next().unwrap_or("");
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match section {
            "ROWS" => {
                let sense = f[0].chars().next().unwrap();
                if sense == 'N' {
                    obj_row = f[1].to_string();
                } else {
                    p.rows.push((f[1].to_string(), sense));
                }
            }
            "COLUMNS" => {
                if p.vars.last().map(String::as_str) != Some(f[0]) {
                    p.vars.push(f[0].to_string());
                }
                for pair in f[1..].chunks(2) {
                    let v: f64 = pair[1].parse().unwrap();
                    if pair[0] == obj_row {
                        p.objective.insert(f[0].to_string(), v);
                    } else {
                        p.coeffs.insert((pair[0].to_string(), f[0].to_string()), v);
                    }
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    p.rhs.insert(pair[0].to_string(), pair[1].parse().unwrap());
                }
            }
            "BOUNDS" => {
                let name = f[2].to_string();
                match f[0] {
                    "UP" => {
                        p.upper.insert(name, f[3].parse().unwrap());
                    }
                    "LO" => {
                        p.lower.insert(name, f[3].parse().unwrap());
                    }
                    "MI" => {
                        p.lower.insert(name, f64::NEG_INFINITY);
                    }
                    "FX" => {
                        let v: f64 = f[3].parse().unwrap();
                        p.lower.insert(name.clone(), v);
                        p.upper.insert(name, v);
                    }
                    other => panic!("unexpected bound type {other}"),
                }
            }
            _ => {}
        }
    }
    p
}

fn to_lp(p: &Parsed) -> StandardLp {
    let var_index: HashMap<&str, usize> = p.vars.iter().enumerate().map(|(k, v)| (v.as_str(), k)).collect();
    let rows = p
        .rows
        .iter()
        .map(|(name, sense)| {
            let mut coeffs: Vec<(usize, f64)> = p
                .coeffs
                .iter()
                .filter(|((r, _), _)| r == name)
                .map(|((_, v), c)| (var_index[v.as_str()], *c))
                .collect();
            coeffs.sort_by_key(|c| c.0);
            let sense = if *sense == 'E' { Sense::Eq } else { Sense::Le };
            Row { coeffs, sense, rhs: p.rhs.get(name).copied().unwrap_or(0.0) }
        })
        .collect();
    let objective = p.vars.iter().map(|v| p.objective.get(v).copied().unwrap_or(0.0)).collect();
    let lower = p.vars.iter().map(|v| p.lower.get(v).copied().unwrap_or(0.0)).collect();
    let upper = p.vars.iter().map(|v| p.upper.get(v).copied().unwrap_or(f64::INFINITY)).collect();
    StandardLp::new(objective, rows, lower, upper).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn round_trip_reproduces_dimensions_and_names() {
    let m = DenseMatrix::from_fn(4, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 / 3.0 + 0.1);
    let (mn, _) = normalize_columns_l1(&m);
    let p = [0.3, -1.2, 0.7, 2.1, -0.4];
    let lp = build_hottopixx(&mn, 2, 0.1, &p).unwrap().assemble();
    let parsed = parse_mps(&lp.to_mps());
    let (n, mm) = (5, 4);
    assert_eq!(parsed.vars.len(), n * n + mm * n);
    assert_eq!(parsed.rows.len(), lp.num_rows());
    assert_eq!(parsed.vars[0], "X_1_1");
    assert_eq!(parsed.vars[1], "X_2_1");
    assert_eq!(parsed.vars[n * n], "S_1_1");
    assert!(parsed.vars.iter().all(|v| v.starts_with("X_") || v.starts_with("S_")));

    let back = to_lp(&parsed);
    assert_eq!(back.num_vars(), lp.num_vars());
    for k in 0..lp.num_vars() {
        assert!(close(back.objective[k], lp.objective[k]), "objective of {}", parsed.vars[k]);
        assert_eq!(back.lower[k], lp.lower[k]);
        assert_eq!(back.upper[k], lp.upper[k]);
    }
    for (a, b) in back.rows.iter().zip(&lp.rows) {
        assert_eq!(a.sense, b.sense);
        assert!(close(a.rhs, b.rhs));
        let mut bc = b.coeffs.clone();
        bc.sort_by_key(|c| c.0);
        assert_eq!(a.coeffs.len(), bc.len());
        for (x, y) in a.coeffs.iter().zip(&bc) {
            assert_eq!(x.0, y.0);
            assert!(close(x.1, y.1));
        }
    }
}

#[test]
fn reimported_lp_has_the_same_optimum() {
    let lp = small_spec_lp();
    let back = to_lp(&parse_mps(&lp.to_mps()));
    let a = solve(&lp, &SolveOptions::simplex()).unwrap();
    let b = solve(&back, &SolveOptions::simplex()).unwrap();
    assert!(a.is_optimal() && b.is_optimal());
    assert!((a.objective - b.objective).abs() <= 1e-6);
}
