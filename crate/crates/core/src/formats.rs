//! TOML documents for games, strategies and presentations.
//!
//! Questions and answers are 0-indexed.
//!
//! Game:
//!
//! ```toml
//! n = 2
//! k = 2
//! pi = [[0.25, 0.25], ["1/4", "1/4"]]   # decimals or "p/q" strings
//! win = [[0, 0, 0, 0], [0, 0, 1, 1]]   # (x, y, a, b) with D = 1
//! # or: d_table = [[[[1, 0], [0, 1]], ...]]  dense n×n×k×k of 0/1
//! ```
//!
//! Strategy (matrices are lists of rows; an entry is a number or `[re, im]`):
//!
//! ```toml
//! alice = [[A00, A01], [A10, A11]]     # alice[x][a]
//! bob = [[B00, B01], [B10, B11]]
//! [state]
//! kind = "maximally_entangled"        # or maximally_mixed, pure, density
//! d = 2                               # for maximally_entangled
//! ```
//!
//! Presentation:
//!
//! ```toml
//! id = "free_unitaries:1"             # optional registered shape
//! unit = "e"
//! query = "g + g*"                    # optional
//! relations = ["g* g - e", "g g* - e"]
//! [[generators]]
//! name = "g"
//! bound = "1/2^0"
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::games::{Measurement, NonlocalGame, State, Strategy};
use crate::matrix::{ComplexMatrix, Tolerance, C64};
use crate::presentations::{parse_dyadic, Generator, NCPolynomial, Presentation, PresentationId};

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

fn parse_error(text: &str, offset: usize, message: impl Into<String>) -> Error {
    let (line, column) = position(text, offset);
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn from_toml<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        parse_error(text, offset, e.message().to_string())
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

fn exact_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (mantissa, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(ten.pow(scale as u32));
    } else {
        r /= BigRational::from_integer(ten.pow((-scale) as u32));
    }
    Some(if neg { -r } else { r })
}

fn exact_scalar(s: &Scalar) -> Option<BigRational> {
    match s {
        Scalar::Int(i) => Some(BigRational::from_integer((*i).into())),
        // The shortest round-trip decimal, so 0.1 is read as 1/10.
        Scalar::Float(f) if f.is_finite() => exact_decimal(&f.to_string()),
        Scalar::Float(_) => None,
        Scalar::Text(t) => match t.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().ok()?;
                let q: BigInt = q.trim().parse().ok()?;
                if q == BigInt::from(0) {
                    return None;
                }
                Some(BigRational::new(p, q))
            }
            None => exact_decimal(t),
        },
    }
}

/// Dense `[x][y][a][b]` win table.
type DTable = Vec<Vec<Vec<Vec<u8>>>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GameDoc {
    #[serde(default)]
    format: Option<String>,
    n: Spanned<usize>,
    k: Spanned<usize>,
    pi: Spanned<Vec<Vec<Spanned<Scalar>>>>,
    #[serde(default)]
    win: Option<Spanned<Vec<Spanned<Vec<usize>>>>>,
    #[serde(default)]
    d_table: Option<Spanned<DTable>>,
}

pub const GAME_FORMAT: &str = "opstab-game/1";
pub const PRESENTATION_FORMAT: &str = "opstab-presentation/1";
pub const STRATEGY_FORMAT: &str = "opstab-strategy/1";

fn check_format(text: &str, found: &Option<String>, expected: &str) -> Result<()> {
    match found {
        Some(f) if f != expected => Err(parse_error(
            text,
            text.find("format").unwrap_or(0),
            format!("format '{f}' is not '{expected}'"),
        )),
        _ => Ok(()),
    }
}

/// Parses and validates a game document.
pub fn parse_game(text: &str) -> Result<NonlocalGame> {
    let doc: GameDoc = from_toml(text)?;
    check_format(text, &doc.format, GAME_FORMAT)?;
    let n = *doc.n.get_ref();
    let k = *doc.k.get_ref();
    if n == 0 {
        return Err(parse_error(text, doc.n.span().start, "n must be positive"));
    }
    if k == 0 {
        return Err(parse_error(text, doc.k.span().start, "k must be positive"));
    }
    let pi_rows = doc.pi.get_ref();
    if pi_rows.len() != n || pi_rows.iter().any(|r| r.len() != n) {
        return Err(parse_error(
            text,
            doc.pi.span().start,
            format!("pi must be {n}×{n}"),
        ));
    }
    let mut pi = Vec::with_capacity(n * n);
    for row in pi_rows {
        for entry in row {
            let v = exact_scalar(entry.get_ref()).ok_or_else(|| {
                parse_error(text, entry.span().start, "expected a number or \"p/q\"")
            })?;
            if v < BigRational::from_integer(0.into()) {
                return Err(parse_error(
                    text,
                    entry.span().start,
                    "probabilities must be nonnegative",
                ));
            }
            pi.push(v);
        }
    }

    let mut win = vec![false; n * n * k * k];
    match (&doc.win, &doc.d_table) {
        (Some(_), Some(t)) => {
            return Err(parse_error(
                text,
                t.span().start,
                "give either win or d_table, not both",
            ))
        }
        (None, None) => return Err(parse_error(text, 0, "missing win (or d_table)")),
        (Some(list), None) => {
            for quad in list.get_ref() {
                let q = quad.get_ref();
                let ok = q.len() == 4 && q[0] < n && q[1] < n && q[2] < k && q[3] < k;
                if !ok {
                    return Err(parse_error(
                        text,
                        quad.span().start,
                        format!("win entries are [x, y, a, b] with x, y < {n} and a, b < {k}"),
                    ));
                }
                win[((q[0] * n + q[1]) * k + q[2]) * k + q[3]] = true;
            }
        }
        (None, Some(table)) => {
            let t = table.get_ref();
            let shape_ok = t.len() == n
                && t.iter().all(|r| {
                    r.len() == n
                        && r.iter()
                            .all(|s| s.len() == k && s.iter().all(|u| u.len() == k))
                });
            if !shape_ok {
                return Err(parse_error(
                    text,
                    table.span().start,
                    format!("d_table must be {n}×{n}×{k}×{k}"),
                ));
            }
            for (x, rx) in t.iter().enumerate() {
                for (y, ry) in rx.iter().enumerate() {
                    for (a, ra) in ry.iter().enumerate() {
                        for (b, &v) in ra.iter().enumerate() {
                            if v > 1 {
                                return Err(parse_error(
                                    text,
                                    table.span().start,
                                    "d_table entries must be 0 or 1",
                                ));
                            }
                            win[((x * n + y) * k + a) * k + b] = v == 1;
                        }
                    }
                }
            }
        }
    }
    NonlocalGame::new(n, k, pi, win).map_err(|e| match e {
        Error::Input(msg) => parse_error(text, doc.pi.span().start, msg),
        other => other,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

type MatrixDoc = Vec<Vec<Entry>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    kind: Spanned<String>,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    vector: Option<Vec<Entry>>,
    #[serde(default)]
    rho: Option<MatrixDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyDoc {
    #[serde(default)]
    format: Option<String>,
    alice: Spanned<Vec<Vec<MatrixDoc>>>,
    bob: Spanned<Vec<Vec<MatrixDoc>>>,
    state: Spanned<StateDoc>,
}

fn entry(e: &Entry) -> C64 {
    match e {
        Entry::Real(r) => C64::new(*r, 0.0),
        Entry::Complex([re, im]) => C64::new(*re, *im),
    }
}

fn matrix(text: &str, at: usize, m: &MatrixDoc) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = m.iter().map(|r| r.iter().map(entry).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| parse_error(text, at, e.to_string()))
}

fn measurement(
    text: &str,
    doc: &Spanned<Vec<Vec<MatrixDoc>>>,
    tol: &Tolerance,
) -> Result<Measurement> {
    let at = doc.span().start;
    let rows = doc
        .get_ref()
        .iter()
        .map(|row| {
            row.iter()
                .map(|m| matrix(text, at, m))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Measurement::new(rows, tol).map_err(|e| parse_error(text, at, e.to_string()))
}

/// Parses a strategy document; operators are checked to be POVMs.
pub fn parse_strategy(text: &str, tol: &Tolerance) -> Result<Strategy> {
    let doc: StrategyDoc = from_toml(text)?;
    check_format(text, &doc.format, STRATEGY_FORMAT)?;
    let alice = measurement(text, &doc.alice, tol)?;
    let bob = measurement(text, &doc.bob, tol)?;
    let at = doc.state.span().start;
    let s = doc.state.get_ref();
    let err = |msg: &str| parse_error(text, at, msg.to_string());
    let state = match s.kind.get_ref().as_str() {
        "maximally_entangled" => {
            State::maximally_entangled(s.d.ok_or_else(|| err("maximally_entangled needs d"))?)
        }
        "maximally_mixed" => State::maximally_mixed(s.dim.unwrap_or(alice.dim())),
        "pure" => {
            let v: Vec<C64> = s
                .vector
                .as_ref()
                .ok_or_else(|| err("pure needs vector"))?
                .iter()
                .map(entry)
                .collect();
            if v.iter().all(|z| z.norm() == 0.0) {
                return Err(err("pure state vector must be nonzero"));
            }
            State::pure(&v)
        }
        "density" => {
            let rho = matrix(
                text,
                at,
                s.rho.as_ref().ok_or_else(|| err("density needs rho"))?,
            )?;
            State::new(rho, tol).map_err(|e| parse_error(text, at, e.to_string()))?
        }
        other => {
            return Err(parse_error(
                text,
                s.kind.span().start,
                format!("unknown state kind '{other}'"),
            ))
        }
    };
    Strategy::new(alice, bob, state).map_err(|e| parse_error(text, at, e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorDoc {
    name: Spanned<String>,
    bound: Option<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresentationDoc {
    #[serde(default)]
    format: Option<String>,
    #[serde(default)]
    id: Option<Spanned<String>>,
    #[serde(default = "default_unit")]
    unit: String,
    #[serde(default)]
    query: Option<Spanned<String>>,
    generators: Spanned<Vec<Spanned<GeneratorDoc>>>,
    #[serde(default)]
    relations: Vec<Spanned<String>>,
}

fn default_unit() -> String {
    "e".to_string()
}

/// A parsed presentation document with its optional query polynomial.
#[derive(Clone, Debug)]
pub struct PresentationFile {
    pub presentation: Presentation,
    pub query: Option<NCPolynomial>,
}

/// Offsets a polynomial parse error by the position of its TOML string.
fn relocate(text: &str, span_start: usize, e: Error) -> Error {
    match e {
        Error::Parse {
            column, message, ..
        } => {
            // +1 skips the opening quote.
            parse_error(text, span_start + 1 + column.saturating_sub(1), message)
        }
        Error::Input(message) => parse_error(text, span_start, message),
        other => other,
    }
}

pub fn parse_presentation(text: &str) -> Result<PresentationFile> {
    let doc: PresentationDoc = from_toml(text)?;
    check_format(text, &doc.format, PRESENTATION_FORMAT)?;
    let mut generators = Vec::new();
    for g in doc.generators.get_ref() {
        let gd = g.get_ref();
        let bound = gd.bound.as_ref().ok_or_else(|| {
            parse_error(
                text,
                g.span().start,
                format!("generator '{}' has no norm bound", gd.name.get_ref()),
            )
        })?;
        let value = parse_dyadic(bound.get_ref())
            .map_err(|e| parse_error(text, bound.span().start, e.to_string()))?;
        generators.push(
            Generator::new(gd.name.get_ref().clone(), value)
                .map_err(|e| parse_error(text, gd.name.span().start, e.to_string()))?,
        );
    }
    let mut relations = Vec::new();
    for r in &doc.relations {
        relations.push(
            NCPolynomial::parse(r.get_ref(), &doc.unit)
                .map_err(|e| relocate(text, r.span().start, e))?,
        );
    }
    let mut presentation = Presentation::new(generators, relations, &doc.unit)
        .map_err(|e| parse_error(text, doc.generators.span().start, e.to_string()))?;
    if let Some(id) = &doc.id {
        let parsed: PresentationId = id
            .get_ref()
            .parse()
            .map_err(|e: Error| parse_error(text, id.span().start, e.to_string()))?;
        presentation = presentation
            .with_id(parsed)
            .map_err(|e| parse_error(text, id.span().start, e.to_string()))?;
    }
    let query = match &doc.query {
        None => None,
        Some(q) => Some(
            presentation
                .parse_poly(q.get_ref())
                .map_err(|e| relocate(text, q.span().start, e))?,
        ),
    };
    Ok(PresentationFile {
        presentation,
        query,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHSH: &str = r#"
n = 2
k = 2
pi = [[0.25, 0.25], [0.25, 0.25]]
win = [
  [0, 0, 0, 0], [0, 0, 1, 1],
  [0, 1, 0, 0], [0, 1, 1, 1],
  [1, 0, 0, 0], [1, 0, 1, 1],
  [1, 1, 0, 1], [1, 1, 1, 0],
]
"#;

    #[test]
    fn chsh_document() {
        let g = parse_game(CHSH).unwrap();
        assert_eq!((g.n(), g.k()), (2, 2));
        assert_eq!(g.winning_tuples(), 8);
        assert_eq!(g, NonlocalGame::chsh());
    }

    #[test]
    fn dense_table_matches_list() {
        let text = r#"
n = 2
k = 2
pi = [["1/4", "1/4"], ["1/4", "1/4"]]
d_table = [[[[1, 0], [0, 1]], [[1, 0], [0, 1]]], [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]]
"#;
        assert_eq!(parse_game(text).unwrap(), NonlocalGame::chsh());
    }

    #[test]
    fn bad_distribution_is_located() {
        let text = "n = 1\nk = 1\npi = [[0.99]]\nwin = []\n";
        match parse_game(text).unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 6)),
            e => panic!("{e}"),
        }
        let text = "n = 1\nk = 1\npi = [[\"1/0\"]]\nwin = []\n";
        assert!(matches!(
            parse_game(text),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn out_of_range_quadruple() {
        let text = "n = 1\nk = 2\npi = [[1]]\nwin = [[0, 0, 2, 0]]\n";
        assert!(matches!(
            parse_game(text),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn toml_syntax_errors_have_positions() {
        assert!(matches!(
            parse_game("n = \n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn decimal_probabilities_are_exact() {
        let text = "n = 2\nk = 1\npi = [[0.1, 0.2], [0.3, 0.4]]\nwin = [[0, 0, 0, 0]]\n";
        let g = parse_game(text).unwrap();
        assert_eq!(g.pi_exact(0, 0), &BigRational::new(1.into(), 10.into()));
    }

    #[test]
    fn presentation_documents() {
        let text = r#"
id = "free_unitaries:1"
query = "g + g*"
relations = ["g* g - e", "g g* - e"]
[[generators]]
name = "g"
bound = "1/2^0"
"#;
        let f = parse_presentation(text).unwrap();
        assert_eq!(f.presentation.id(), Some(PresentationId::FreeUnitaries(1)));
        assert_eq!(f.query.unwrap().to_string(), "g + g*");

        let missing = "relations = []\n[[generators]]\nname = \"g\"\n";
        assert!(matches!(
            parse_presentation(missing),
            Err(Error::Parse { line: 2, .. })
        ));

        let bad_rel = "relations = [\"g + (\"]\n[[generators]]\nname = \"g\"\nbound = \"1\"\n";
        match parse_presentation(bad_rel).unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (1, 20)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn strategy_documents() {
        let text = r#"
alice = [[[[1, 0], [0, 0]], [[0, 0], [0, 1]]]]
bob = [[[[0.5, 0], [0, 0.5]], [[0.5, 0], [0, 0.5]]]]
[state]
kind = "pure"
vector = [[0.6, 0], [0, 0.8]]
"#;
        let s = parse_strategy(text, &Tolerance::default()).unwrap();
        assert_eq!(s.dim(), 2);
        assert!((s.state.rho().get(1, 1).re - 0.64).abs() < 1e-15);
        let bad = text.replace(
            "[[0.5, 0], [0, 0.5]], [[0.5, 0]",
            "[[0.5, 0], [0, 0.5]], [[0.6, 0]",
        );
        assert!(matches!(
            parse_strategy(&bad, &Tolerance::default()),
            Err(Error::Parse { .. })
        ));
    }
}
