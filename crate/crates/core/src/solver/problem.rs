//! Problem files: flat `key = value` text with `#` comments.
//!
//! ```text
//! n = 1
//! lo = -1, -1
//! hi = 1, 1
//! pointsPerAxis = 17
//! theta = 0.4            # or hessianLower / hessianUpper
//! boundary = quadratic
//! rhs = constant:2
//! ```
//!
//! Fields are `quadratic` (`|z|²`), `quartic_radial` (`|z|⁴/4`),
//! `constant:<v>` or `file:<path>` with one value per grid point in
//! lexicographic order. As a right-hand side a built-in name stands for
//! `F(D²u)` of that function.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::envelope::ThetaBox;
use crate::error::{Error, ParseError, Result};
use crate::matrix::{admissible_theta, SymmetricMatrix};

use super::grid::{GridSpec, ScalarField};
use super::linear::LinearSolver;
use super::policy::SolveOptions;

const KEYS: [&str; 14] = [
    "n",
    "lo",
    "hi",
    "pointsPerAxis",
    "theta",
    "hessianLower",
    "hessianUpper",
    "boundary",
    "rhs",
    "exact",
    "tol",
    "maxIter",
    "refinements",
    "linearSolver",
];

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Quadratic,
    QuarticRadial,
    Constant(f64),
    File(PathBuf),
}

fn sq(x: &[f64]) -> f64 {
    x.iter().map(|t| t * t).sum()
}

impl FieldSource {
    pub fn parse(text: &str, base: &Path) -> std::result::Result<Self, String> {
        let text = text.trim();
        match text {
            "quadratic" => return Ok(FieldSource::Quadratic),
            "quartic_radial" => return Ok(FieldSource::QuarticRadial),
            _ => {}
        }
        if let Some(v) = text.strip_prefix("constant:") {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("invalid constant `{}`", v.trim()))?;
            return Ok(FieldSource::Constant(v));
        }
        if let Some(p) = text.strip_prefix("file:") {
            let p = Path::new(p.trim());
            return Ok(FieldSource::File(if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }));
        }
        Err(format!(
            "unknown field `{text}` (expected quadratic, quartic_radial, constant:<v> or file:<path>)"
        ))
    }

    /// Value of the field as a function; `None` for file data.
    pub fn value(&self, x: &[f64]) -> Option<f64> {
        match self {
            FieldSource::Quadratic => Some(sq(x)),
            FieldSource::QuarticRadial => Some(sq(x) * sq(x) / 4.0),
            FieldSource::Constant(v) => Some(*v),
            FieldSource::File(_) => None,
        }
    }

    /// Exact Hessian of a built-in.
    pub fn hessian(&self, x: &[f64]) -> Option<SymmetricMatrix> {
        let d = x.len();
        match self {
            FieldSource::Quadratic => Some(SymmetricMatrix::scaled_identity(d, 2.0)),
            FieldSource::QuarticRadial => {
                let r2 = sq(x);
                Some(SymmetricMatrix::from_fn(d, |i, j| {
                    2.0 * x[i] * x[j] + if i == j { r2 } else { 0.0 }
                }))
            }
            FieldSource::Constant(_) => Some(SymmetricMatrix::zeros(d)),
            FieldSource::File(_) => None,
        }
    }

    /// `F(D²u)` in closed form when the source is read as a right-hand
    /// side: `2`, `2^{1/n}|z|²`, or the constant itself.
    pub fn rhs_value(&self, x: &[f64]) -> Option<f64> {
        let n = (x.len() / 2) as f64;
        match self {
            FieldSource::Quadratic => Some(2.0),
            FieldSource::QuarticRadial => Some(2f64.powf(1.0 / n) * sq(x)),
            FieldSource::Constant(v) => Some(*v),
            FieldSource::File(_) => None,
        }
    }

    fn sample(&self, grid: &GridSpec, as_rhs: bool) -> Result<ScalarField> {
        match self {
            FieldSource::File(path) => read_field_file(path, grid),
            src if as_rhs => Ok(ScalarField::from_fn(grid, |x| src.rhs_value(x).unwrap())),
            src => Ok(ScalarField::from_fn(grid, |x| src.value(x).unwrap())),
        }
    }

    pub fn solution_field(&self, grid: &GridSpec) -> Result<ScalarField> {
        self.sample(grid, false)
    }

    pub fn rhs_field(&self, grid: &GridSpec) -> Result<ScalarField> {
        self.sample(grid, true)
    }
}

/// One value per line; blank lines and `#` comments are skipped.
pub fn read_field_file(path: &Path, grid: &GridSpec) -> Result<ScalarField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in text.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| {
            ParseError::new(i + 1, format!("invalid value `{t}` in {}", path.display()))
        })?;
        values.push(v);
    }
    ScalarField::new(grid.clone(), values)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSpec {
    Theta(f64),
    Bounds { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub n: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points_per_axis: usize,
    pub theta: ThetaSpec,
    pub boundary: FieldSource,
    pub rhs: FieldSource,
    /// Defaults to the boundary source when that is a built-in.
    pub exact: Option<FieldSource>,
    pub options: SolveOptions,
    pub refinements: Vec<usize>,
}

impl Problem {
    pub fn theta_box(&self) -> Result<ThetaBox> {
        let theta = match self.theta {
            ThetaSpec::Theta(t) => t,
            ThetaSpec::Bounds { lower, upper } => admissible_theta(lower, upper)?,
        };
        ThetaBox::new(theta, self.n)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(
            self.n,
            self.lo.clone(),
            self.hi.clone(),
            self.points_per_axis,
        )
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn scalar<T: std::str::FromStr>(entries: &BTreeMap<String, Entry>, key: &str) -> Result<Option<T>> {
    entries
        .get(key)
        .map(|e| {
            e.value.parse().map_err(|_| {
                ParseError::new(e.line, format!("{key}: invalid value `{}`", e.value)).into()
            })
        })
        .transpose()
}

fn list<T: std::str::FromStr>(
    entries: &BTreeMap<String, Entry>,
    key: &str,
) -> Result<Option<Vec<T>>> {
    entries
        .get(key)
        .map(|e| {
            e.value
                .split(',')
                .map(|t| {
                    t.trim().parse().map_err(|_| {
                        ParseError::new(e.line, format!("{key}: invalid entry `{}`", t.trim()))
                            .into()
                    })
                })
                .collect()
        })
        .transpose()
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::MissingKey(key.to_string()))
}

fn field(entries: &BTreeMap<String, Entry>, key: &str, base: &Path) -> Result<Option<FieldSource>> {
    entries
        .get(key)
        .map(|e| {
            FieldSource::parse(&e.value, base)
                .map_err(|m| ParseError::new(e.line, format!("{key}: {m}")).into())
        })
        .transpose()
}

/// Parses a problem file; relative `file:` paths resolve against `base`.
pub fn parse_problem(text: &str, base: &Path) -> Result<Problem> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            ParseError::new(line, format!("expected `key = value`, found `{content}`"))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ParseError::new(line, format!("unknown key `{key}`")).into());
        }
        if entries.contains_key(key) {
            return Err(ParseError::new(line, format!("duplicate key `{key}`")).into());
        }
        entries.insert(
            key.to_string(),
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }

    let n: usize = required(scalar(&entries, "n")?, "n")?;
    let dim = 2 * n;
    let corner = |key: &str| -> Result<Vec<f64>> {
        let v: Vec<f64> = required(list(&entries, key)?, key)?;
        match v.len() {
            1 => Ok(vec![v[0]; dim]),
            l if l == dim => Ok(v),
            l => Err(ParseError::new(
                entries[key].line,
                format!("{key}: expected 1 or {dim} values, found {l}"),
            )
            .into()),
        }
    };
    let lo = corner("lo")?;
    let hi = corner("hi")?;
    let points_per_axis = required(scalar(&entries, "pointsPerAxis")?, "pointsPerAxis")?;

    let theta = match (
        scalar::<f64>(&entries, "theta")?,
        scalar::<f64>(&entries, "hessianLower")?,
        scalar::<f64>(&entries, "hessianUpper")?,
    ) {
        (Some(t), None, None) => ThetaSpec::Theta(t),
        (None, Some(lower), Some(upper)) => ThetaSpec::Bounds { lower, upper },
        (None, None, None) => return Err(Error::MissingKey("theta".into())),
        (None, Some(_), None) => return Err(Error::MissingKey("hessianUpper".into())),
        (None, None, Some(_)) => return Err(Error::MissingKey("hessianLower".into())),
        (Some(_), _, _) => {
            return Err(Error::InvalidArgument(
                "give either theta or hessianLower/hessianUpper, not both".into(),
            ))
        }
    };

    let boundary = required(field(&entries, "boundary", base)?, "boundary")?;
    let rhs = required(field(&entries, "rhs", base)?, "rhs")?;
    let exact = match field(&entries, "exact", base)? {
        Some(e) => Some(e),
        None if !matches!(boundary, FieldSource::File(_)) => Some(boundary.clone()),
        None => None,
    };

    let defaults = SolveOptions::default();
    let linear = match entries
        .get("linearSolver")
        .map(|e| (e.line, e.value.as_str()))
    {
        None | Some((_, "auto")) => LinearSolver::Auto,
        Some((_, "banded_lu")) => LinearSolver::BandedLu,
        Some((_, "gauss_seidel")) => LinearSolver::GaussSeidel,
        Some((line, other)) => {
            return Err(ParseError::new(
                line,
                format!("linearSolver: expected auto, banded_lu or gauss_seidel, found `{other}`"),
            )
            .into())
        }
    };
    let options = SolveOptions {
        max_iter: scalar(&entries, "maxIter")?.unwrap_or(defaults.max_iter),
        tol: scalar(&entries, "tol")?.unwrap_or(defaults.tol),
        linear,
    };
    let refinements = list(&entries, "refinements")?.unwrap_or_else(|| vec![points_per_axis]);

    Ok(Problem {
        n,
        lo,
        hi,
        points_per_axis,
        theta,
        boundary,
        rhs,
        exact,
        options,
        refinements,
    })
}

pub fn read_problem(path: &Path) -> Result<Problem> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_problem(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::operator_f;

    const QUADRATIC: &str = "\
# unit test problem
n = 1
lo = -1
hi = 1, 1
pointsPerAxis = 9
theta = 0.4
boundary = quadratic
rhs = constant:2   # F(2I)
";

    #[test]
    fn parses_a_minimal_problem() {
        let p = parse_problem(QUADRATIC, Path::new(".")).unwrap();
        assert_eq!(p.lo, vec![-1.0, -1.0]);
        assert_eq!(p.rhs, FieldSource::Constant(2.0));
        assert_eq!(p.exact, Some(FieldSource::Quadratic));
        assert_eq!(p.refinements, vec![9]);
        assert_eq!(p.options, SolveOptions::default());
        assert!((p.theta_box().unwrap().theta() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn hessian_bounds_become_theta() {
        let text = QUADRATIC.replace("theta = 0.4", "hessianLower = 2\nhessianUpper = 2");
        let p = parse_problem(&text, Path::new(".")).unwrap();
        assert_eq!(p.theta_box().unwrap().theta(), 0.5);
        let bad = QUADRATIC.replace("theta = 0.4", "hessianLower = 3\nhessianUpper = 2");
        assert!(parse_problem(&bad, Path::new("."))
            .unwrap()
            .theta_box()
            .is_err());
    }

    #[test]
    fn missing_key_is_named() {
        let text = QUADRATIC.replace("pointsPerAxis = 9\n", "");
        match parse_problem(&text, Path::new(".")) {
            Err(Error::MissingKey(k)) => assert_eq!(k, "pointsPerAxis"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let cases = [
            ("n = 1\nbogus = 3\n", 2, "unknown key"),
            ("n = 1\nn = 2\n", 2, "duplicate"),
            ("n = 1\nlo -1\n", 2, "key = value"),
            ("n = x\n", 1, "invalid value"),
        ];
        for (text, line, needle) in cases {
            match parse_problem(text, Path::new(".")) {
                Err(Error::Parse(e)) => {
                    assert_eq!(e.line, line, "{text}");
                    assert!(e.message.contains(needle), "{}", e.message);
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn builtin_rhs_matches_operator_f() {
        for n in 1..=2 {
            let x: Vec<f64> = (0..2 * n).map(|i| 0.3 + 0.2 * i as f64).collect();
            for src in [FieldSource::Quadratic, FieldSource::QuarticRadial] {
                let f = operator_f(&src.hessian(&x).unwrap()).unwrap();
                assert!(
                    (f - src.rhs_value(&x).unwrap()).abs() < 1e-12,
                    "{src:?} n={n}"
                );
            }
        }
    }

    #[test]
    fn file_fields_are_read_in_grid_order() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::cube(1, 0.0, 1.0, 5).unwrap();
        let text: String = (0..25).map(|k| format!("{k}\n")).collect();
        fs::write(dir.path().join("g.txt"), format!("# header\n{text}")).unwrap();
        let src = FieldSource::parse("file:g.txt", dir.path()).unwrap();
        let f = src.rhs_field(&grid).unwrap();
        assert_eq!(f.values()[7], 7.0);
        fs::write(dir.path().join("short.txt"), "1\n2\n").unwrap();
        let short = FieldSource::parse("file:short.txt", dir.path()).unwrap();
        assert!(matches!(
            short.solution_field(&grid),
            Err(Error::EntryCount {
                expected: 25,
                found: 2
            })
        ));
    }
}
