use super::document::{Convention, Offsets, ProblemDocument, Rat, RawHalfspace};
use super::CliError;
use crate::rational::{self, int, ratio, QVec, Q};
use crate::toric::Fan;

/// Names, parameter hints and one-line descriptions of the built-in problems.
pub const REGISTRY: [(&str, &str, &str); 7] = [
    ("p2", "", "projective plane, anticanonical"),
    ("p1xp1", "", "P1 x P1, anticanonical"),
    ("blowup-p2-1pt", "", "P2 blown up at one point, anticanonical"),
    ("hexagon-dP6-t", "t (default 1/10)", "P2 blown up at three points, rows D_t and D_-t"),
    ("pE-4fold-c", "c (default 1/2) or \"star\"", "projectivized bundle fourfold, rows P'(c) and P'(1-c)"),
    ("p1-fubini", "", "P1 with one anticanonical row and V = 0"),
    ("p1-pair", "v (default 0)", "[-3/4, 1/4] and [-1/4, 3/4] with fields (v, 0)"),
];

pub fn registry_listing() -> String {
    REGISTRY
        .iter()
        .map(
            |(name, param, about)| {
                if param.is_empty() {
                    format!("  {name}: {about}")
                } else {
                    format!("  {name}[:{param}]: {about}")
                }
            },
        )
        .collect::<Vec<_>>()
        .join("\n")
}

fn parse_param(name: &str, param: Option<&str>, default: Q) -> Result<Q, CliError> {
    match param {
        None => Ok(default),
        Some(p) => rational::parse(p).map_err(|e| CliError::Usage(format!("bad parameter for {name}: {e}"))),
    }
}

/// `1/2 + sqrt(5/7)/4`, where the barycenter sum of the fourfold vanishes.
pub fn c_star() -> f64 {
    0.5 + (5.0f64 / 7.0).sqrt() / 4.0
}

/// Hexagon support vector `D_t`: `1/2 + t` on the ray `(1,1)`, `1/2` elsewhere.
pub fn hexagon_row(t: &Q) -> QVec {
    let mut row = vec![ratio(1, 2); 6];
    row[1] = ratio(1, 2) + t;
    row
}

/// Inward-pointing normals of the fourfold example written in `<= ` form.
pub const FOURFOLD_NORMALS: [[i64; 4]; 7] =
    [[-1, -1, 0, -2], [1, 0, 0, -2], [0, 1, 0, -2], [0, 0, -1, 3], [0, 0, 1, 3], [0, 0, 0, 6], [0, 0, 0, -6]];

/// Right-hand sides of `P'(c)`: `c` on the fourth and fifth normals, `1/2` elsewhere.
pub fn fourfold_rhs(c: &Q) -> QVec {
    (0..7).map(|j| if j == 3 || j == 4 { c.clone() } else { ratio(1, 2) }).collect()
}

pub fn builtin_example(spec: &str) -> Result<ProblemDocument, CliError> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let takes_param = REGISTRY.iter().find(|r| r.0 == name).map(|r| !r.1.is_empty());
    match takes_param {
        None => {
            return Err(CliError::Usage(format!("unknown example {name:?}; available:\n{}", registry_listing())));
        }
        Some(false) if param.is_some() => {
            return Err(CliError::Usage(format!("example {name} takes no parameter")));
        }
        _ => {}
    }
    let ones = |m: usize| vec![int(1); m];
    let doc = match name {
        "p2" => ProblemDocument::from_fan(spec, &Fan::projective_plane(), &[ones(3)]),
        "p1xp1" => ProblemDocument::from_fan(spec, &Fan::p1_x_p1(), &[ones(4)]),
        "blowup-p2-1pt" => ProblemDocument::from_fan(spec, &Fan::blowup_p2_one_point(), &[ones(4)]),
        "hexagon-dP6-t" => {
            let t = parse_param(name, param, ratio(1, 10))?;
            let minus: Q = -&t;
            ProblemDocument::from_fan(spec, &Fan::hexagon(), &[hexagon_row(&t), hexagon_row(&minus)])
        }
        "pE-4fold-c" => {
            let (c, float_mode) = match param {
                Some("star") => (rational::from_f64(c_star()).expect("finite"), true),
                other => (parse_param(name, other, ratio(1, 2))?, false),
            };
            let first = fourfold_rhs(&c);
            let second = fourfold_rhs(&(int(1) - &c));
            let halfspaces = FOURFOLD_NORMALS
                .iter()
                .enumerate()
                .map(|(j, d)| RawHalfspace {
                    normal: d.iter().map(|&x| Rat(int(x))).collect(),
                    offset: Offsets::PerRow(vec![Rat(first[j].clone()), Rat(second[j].clone())]),
                })
                .collect();
            let mut doc = ProblemDocument {
                name: spec.to_string(),
                dimension: 4,
                rays: None,
                max_cones: None,
                halfspaces: Some(halfspaces),
                decomposition: None,
                vector_fields: None,
                options: Default::default(),
            };
            doc.options.halfspace_convention = Convention::Leq;
            doc.options.float_mode = float_mode;
            doc
        }
        "p1-fubini" => {
            let mut doc = ProblemDocument::from_fan(spec, &Fan::projective_line(), &[ones(2)]);
            doc.vector_fields = Some(vec![vec![0.0]]);
            doc
        }
        "p1-pair" => {
            let v = parse_param(name, param, int(0))?;
            let rows = [vec![ratio(3, 4), ratio(1, 4)], vec![ratio(1, 4), ratio(3, 4)]];
            let mut doc = ProblemDocument::from_fan(spec, &Fan::projective_line(), &rows);
            doc.vector_fields = Some(vec![vec![rational::to_f64(&v)], vec![0.0]]);
            doc
        }
        _ => unreachable!("registry and match agree"),
    };
    Ok(doc)
}
