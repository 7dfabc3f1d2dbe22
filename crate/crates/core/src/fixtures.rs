//! Reference states that kill `A_M` to the highest known order, stored as
//! exact radical expressions.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::design::{design_order, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::majorana::{state_constellation, Constellation};
use crate::multipole::cumulative_pure;
use crate::spinstate::SpinState;

/// How a tabulated quantity compares with the description to its left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Same,
    Similar,
    Different,
}

/// Configuration and order of the corresponding "queen" state; recorded, never computed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueensNote {
    pub configuration: &'static str,
    pub order: u32,
}

/// Amplitude `psi_m` keyed by `2m`, as an exact expression.
pub type ExactAmplitudes = &'static [(i32, &'static str)];

#[derive(Clone, Debug, Serialize)]
pub struct FixtureRecord {
    #[serde(rename = "S")]
    pub spin: HalfInt,
    #[serde(rename = "claimed_M")]
    pub claimed_order: i64,
    #[serde(serialize_with = "amplitudes_as_map")]
    pub amplitudes: ExactAmplitudes,
    /// Values as originally printed, when they differ from `amplitudes`.
    #[serde(
        serialize_with = "optional_amplitudes_as_map",
        skip_serializing_if = "Option::is_none"
    )]
    pub printed_amplitudes: Option<ExactAmplitudes>,
    pub constellation_name: &'static str,
    pub design_relation: Relation,
    pub design_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queens: Option<QueensNote>,
}

fn amplitude_map(a: ExactAmplitudes) -> BTreeMap<String, &'static str> {
    a.iter()
        .map(|&(m, e)| (HalfInt::from_twice(m).to_string(), e))
        .collect()
}

fn amplitudes_as_map<S: serde::Serializer>(
    a: &ExactAmplitudes,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    amplitude_map(a).serialize(s)
}

fn optional_amplitudes_as_map<S: serde::Serializer>(
    a: &Option<ExactAmplitudes>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    a.map(amplitude_map).serialize(s)
}

impl FixtureRecord {
    pub fn state(&self) -> Result<SpinState> {
        build_state(self.spin, self.amplitudes, false)
    }

    /// The state from the printed amplitudes, normalized; `None` when they agree.
    pub fn printed_state(&self) -> Option<SpinState> {
        self.printed_amplitudes
            .map(|a| build_state(self.spin, a, true).expect("printed amplitudes parse"))
    }
}

fn build_state(spin: HalfInt, amps: ExactAmplitudes, normalize: bool) -> Result<SpinState> {
    let mut v = vec![Complex64::new(0.0, 0.0); spin.dim()];
    for &(twice_m, expr) in amps {
        let index = (twice_m + spin.twice()) / 2;
        v[index as usize] = evaluate(expr)?;
    }
    if normalize {
        SpinState::new_normalized(spin, v)
    } else {
        SpinState::new(spin, v)
    }
}

const fn row(
    twice_s: i32,
    claimed_order: i64,
    amplitudes: ExactAmplitudes,
    constellation_name: &'static str,
    design_relation: Relation,
    design_t: Option<usize>,
    queens: Option<(&'static str, u32)>,
) -> FixtureRecord {
    FixtureRecord {
        spin: HalfInt::from_twice(twice_s),
        claimed_order,
        amplitudes,
        printed_amplitudes: None,
        constellation_name,
        design_relation,
        design_t,
        queens: match queens {
            Some((configuration, order)) => Some(QueensNote {
                configuration,
                order,
            }),
            None => None,
        },
    }
}

fn table() -> &'static [FixtureRecord] {
    static TABLE: OnceLock<Vec<FixtureRecord>> = OnceLock::new();
    TABLE.get_or_init(|| {
        use Relation::*;
        let mut rows = vec![
            row(
                2,
                1,
                &[(0, "1")],
                "radial line",
                Same,
                Some(1),
                Some(("same", 1)),
            ),
            row(
                3,
                1,
                &[(-3, "1/sqrt(2)"), (3, "1/sqrt(2)")],
                "equatorial triangle",
                Same,
                Some(1),
                Some(("same", 1)),
            ),
            row(
                4,
                2,
                &[(-2, "sqrt(2/3)"), (4, "1/sqrt(3)")],
                "tetrahedron",
                Same,
                Some(2),
                Some(("same", 2)),
            ),
            row(
                5,
                1,
                &[(-5, "1/sqrt(2)"), (5, "1/sqrt(2)")],
                "equatorial triangle + poles",
                Same,
                Some(1),
                Some(("same", 1)),
            ),
            row(
                6,
                3,
                &[(-4, "1/sqrt(2)"), (4, "1/sqrt(2)")],
                "octahedron",
                Same,
                Some(3),
                Some(("same", 3)),
            ),
            row(
                7,
                2,
                &[(-5, "sqrt(7/18)"), (1, "sqrt(7/18)"), (7, "sqrt(2/9)")],
                "two triangles + pole",
                Similar,
                Some(2),
                Some(("equatorial pentagon + poles", 1)),
            ),
            row(
                8,
                3,
                &[(-8, "sqrt(5/24)"), (0, "sqrt(7/12)"), (8, "sqrt(5/24)")],
                "cube",
                Same,
                Some(3),
                Some(("see Giraud et al. 2010", 1)),
            ),
            row(
                9,
                2,
                &[
                    (-9, "1/sqrt(6)"),
                    (-3, "1/sqrt(3)"),
                    (3, "1/sqrt(3)"),
                    (9, "1/sqrt(6)"),
                ],
                "three triangles",
                Similar,
                Some(2),
                Some(("similar", 1)),
            ),
            row(
                10,
                3,
                &[(-10, "1/sqrt(5)"), (0, "sqrt(3/5)"), (10, "1/sqrt(5)")],
                "pentagonal prism",
                Similar,
                Some(3),
                Some(("two staggered squares + poles", 1)),
            ),
            row(
                11,
                3,
                &[
                    (-11, "sqrt(17)/12"),
                    (-5, "i*sqrt(55)/12"),
                    (5, "i*sqrt(55)/12"),
                    (11, "sqrt(17)/12"),
                ],
                "pentagon + two triangles",
                Similar,
                Some(3),
                Some(("similar", 1)),
            ),
            row(
                12,
                5,
                &[(-10, "sqrt(7)/5"), (0, "-sqrt(11)/5"), (10, "-sqrt(7)/5")],
                "icosahedron",
                Same,
                Some(5),
                Some(("same", 5)),
            ),
            row(
                14,
                4,
                &[
                    (-12, "sqrt(854/3645)"),
                    (-6, "sqrt(637/13420) + i*sqrt(512603/9783180)"),
                    (0, "sqrt(12561757/163053000) - i*sqrt(512603/2013000)"),
                    (6, "sqrt(637/13420) + i*sqrt(512603/9783180)"),
                    (12, "sqrt(854/3645)"),
                ],
                "three squares + poles",
                Different,
                Some(4),
                None,
            ),
            row(
                20,
                5,
                &[
                    (-20, "sqrt(187/1875)"),
                    (-10, "sqrt(209/625)"),
                    (0, "sqrt(247/1875)"),
                    (10, "-sqrt(209/625)"),
                    (20, "sqrt(187/1875)"),
                ],
                "deformed dodecahedron",
                Similar,
                Some(5),
                None,
            ),
        ];
        rows[2].printed_amplitudes = Some(&[(-2, "1/sqrt(3)"), (4, "sqrt(2/3)")]);
        rows[8].printed_amplitudes =
            Some(&[(-10, "1/sqrt(3)"), (0, "1/sqrt(5)"), (10, "1/sqrt(3)")]);
        rows
    })
}

pub fn all_fixtures() -> &'static [FixtureRecord] {
    table()
}

pub fn load_fixture(spin: HalfInt) -> Result<&'static FixtureRecord> {
    table()
        .iter()
        .find(|r| r.spin == spin)
        .ok_or(Error::NotTabulated(spin))
}

pub fn table1_state(spin: HalfInt) -> Result<SpinState> {
    load_fixture(spin)?.state()
}

/// Points grouped by height along an axis, highest first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub height: f64,
    pub count: usize,
}

/// Groups points whose heights along `axis` differ by less than `tol`.
pub fn rings_about(c: &Constellation, axis: &Vector3<f64>, tol: f64) -> Vec<Ring> {
    let axis = axis.normalize();
    let mut heights: Vec<f64> = c.vectors().iter().map(|v| v.dot(&axis)).collect();
    heights.sort_by(|a, b| b.total_cmp(a));
    let mut rings: Vec<(f64, usize)> = Vec::new();
    for h in heights {
        match rings.last_mut() {
            Some((sum, n)) if (*sum / *n as f64 - h).abs() < tol => {
                *sum += h;
                *n += 1;
            }
            _ => rings.push((h, 1)),
        }
    }
    rings
        .into_iter()
        .map(|(sum, n)| Ring {
            height: sum / n as f64,
            count: n,
        })
        .collect()
}

/// Ring decomposition about the star axis that yields the fewest rings,
/// with that star on top.
pub fn ring_structure(c: &Constellation, tol: f64) -> (Vector3<f64>, Vec<Ring>) {
    c.vectors()
        .into_iter()
        .map(|axis| {
            let rings = rings_about(c, &axis, tol);
            (axis, rings)
        })
        .min_by_key(|(_, rings)| rings.len())
        .expect("constellation is nonempty")
}

pub const KILL_THRESHOLD: f64 = 1e-10;
pub const SURVIVE_THRESHOLD: f64 = 1e-6;
pub const DESIGN_T_MAX: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    #[serde(rename = "S")]
    pub spin: HalfInt,
    #[serde(rename = "claimed_M")]
    pub claimed_order: i64,
    pub norm_error: f64,
    pub a_claimed: f64,
    pub a_next: Option<f64>,
    pub design_relation: Relation,
    pub table_t: Option<usize>,
    pub design_order: usize,
    pub rings: Vec<Ring>,
    pub constellation: Constellation,
    pub normalized: bool,
    pub killed: bool,
    pub maximal: bool,
    /// Only judged where the design relation is `same`.
    pub design_matches: Option<bool>,
    pub passed: bool,
}

pub fn verify_fixture(spin: HalfInt) -> Result<FixtureReport> {
    let rec = load_fixture(spin)?;
    let state = rec.state()?;
    let norm_error = (state.norm() - 1.0).abs();
    let a_claimed = cumulative_pure(&state, rec.claimed_order)?;
    let a_next = if rec.claimed_order < spin.twice() as i64 {
        Some(cumulative_pure(&state, rec.claimed_order + 1)?)
    } else {
        None
    };
    let constellation = state_constellation(&state);
    let order = design_order(&constellation, DESIGN_T_MAX, DEFAULT_EPS);
    let (_, rings) = ring_structure(&constellation, 1e-6);
    let normalized = norm_error < 1e-14;
    let killed = a_claimed < KILL_THRESHOLD;
    let maximal = a_next.is_none_or(|a| a > SURVIVE_THRESHOLD);
    let design_matches =
        (rec.design_relation == Relation::Same).then(|| Some(order) == rec.design_t);
    Ok(FixtureReport {
        spin,
        claimed_order: rec.claimed_order,
        norm_error,
        a_claimed,
        a_next,
        design_relation: rec.design_relation,
        table_t: rec.design_t,
        design_order: order,
        rings,
        constellation,
        normalized,
        killed,
        maximal,
        design_matches,
        passed: normalized && killed && maximal && design_matches != Some(false),
    })
}

/// A record as exported: the state and its constellation in the shared schemas.
#[derive(Clone, Debug, Serialize)]
pub struct FixtureExport {
    #[serde(flatten)]
    pub record: FixtureRecord,
    pub state: SpinState,
    pub constellation: Constellation,
}

pub fn export_fixtures() -> Result<Vec<FixtureExport>> {
    table()
        .iter()
        .map(|r| {
            let state = r.state()?;
            let constellation = state_constellation(&state);
            Ok(FixtureExport {
                record: r.clone(),
                state,
                constellation,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
enum Expr {
    Int(u64),
    I,
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self) -> Complex64 {
        match self {
            Expr::Int(n) => Complex64::new(*n as f64, 0.0),
            Expr::I => Complex64::new(0.0, 1.0),
            Expr::Neg(e) => -e.eval(),
            Expr::Sqrt(e) => {
                let v = e.eval();
                if v.im == 0.0 && v.re >= 0.0 {
                    Complex64::new(v.re.sqrt(), 0.0)
                } else if v.im == 0.0 {
                    Complex64::new(0.0, (-v.re).sqrt())
                } else {
                    v.sqrt()
                }
            }
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(), b.eval());
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    _ if b.im == 0.0 => a / b.re,
                    _ => a / b,
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn fail<T>(&self, what: &str) -> Result<T> {
        Err(Error::Invalid(format!(
            "expression {:?}: {what} at offset {}",
            self.src, self.pos
        )))
    }

    fn peek(&mut self) -> Option<char> {
        let rest = &self.src[self.pos..];
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
        trimmed.chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.fail("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let rest = &self.src[self.pos..];
                let len = rest
                    .find(|c: char| !c.is_ascii_digit())
                    .unwrap_or(rest.len());
                let n = rest[..len]
                    .parse()
                    .or_else(|_| self.fail("integer overflow"))?;
                self.pos += len;
                Ok(Expr::Int(n))
            }
            Some(_) if self.src[self.pos..].starts_with("sqrt") => {
                self.pos += 4;
                if !self.eat('(') {
                    return self.fail("expected '(' after sqrt");
                }
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.fail("expected ')'");
                }
                Ok(Expr::Sqrt(Box::new(e)))
            }
            Some('i') => {
                self.pos += 1;
                Ok(Expr::I)
            }
            Some(_) => self.fail("unexpected character"),
            None => self.fail("unexpected end"),
        }
    }
}

/// Evaluates integers, `i`, `sqrt(..)`, parentheses and `+ - * /`.
pub fn evaluate(src: &str) -> Result<Complex64> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.fail("trailing input");
    }
    Ok(e.eval())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::dodecahedron;
    use crate::majorana::{constellation_match, constellation_to_state};
    use crate::multipole::unpolarization_order;
    use crate::spinstate::stokes_expectation;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn expressions() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(evaluate("1").unwrap(), c(1.0, 0.0));
        assert!((evaluate("1/sqrt(2)").unwrap() - c(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((evaluate("i*sqrt(55)/12").unwrap() - c(0.0, 55f64.sqrt() / 12.0)).norm() < 1e-16);
        assert!(
            (evaluate(" -sqrt(7) / 5 ").unwrap() - c(-(7f64.sqrt()) / 5.0, 0.0)).norm() < 1e-16
        );
        assert!((evaluate("2*(3-1)-i").unwrap() - c(4.0, -1.0)).norm() < 1e-16);
        assert!((evaluate("sqrt(-4)").unwrap() - c(0.0, 2.0)).norm() < 1e-16);
        for bad in ["", "sqrt 2", "1+", "(1", "1)", "x", "2 3"] {
            assert!(evaluate(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn thirteen_rows() {
        let spins: Vec<i32> = all_fixtures().iter().map(|r| r.spin.twice()).collect();
        assert_eq!(spins, vec![2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 14, 20]);
        assert!(load_fixture(h(16)).is_err());
        for r in all_fixtures() {
            assert!(r.claimed_order <= r.spin.twice() as i64);
        }
    }

    #[test]
    fn load_examples() {
        let r = load_fixture(h(9)).unwrap();
        assert_eq!(r.claimed_order, 2);
        assert_eq!(r.constellation_name, "three triangles");
        let st = r.state().unwrap();
        for (m, v) in [
            (-9, 1.0 / 6f64.sqrt()),
            (9, 1.0 / 6f64.sqrt()),
            (-3, 1.0 / 3f64.sqrt()),
            (3, 1.0 / 3f64.sqrt()),
        ] {
            assert!((st.amp(h(m)).re - v).abs() < 1e-15);
        }
        let r = load_fixture(h(11)).unwrap();
        let st = r.state().unwrap();
        assert!((st.amp(h(11)).re - 17f64.sqrt() / 12.0).abs() < 1e-15);
        assert!((st.amp(h(-5)).im - 55f64.sqrt() / 12.0).abs() < 1e-15);
        assert_eq!(r.claimed_order, 3);
        assert_eq!(
            load_fixture(h(10)).unwrap().constellation_name,
            "pentagonal prism"
        );
    }

    #[test]
    fn every_record_verifies() {
        for r in all_fixtures() {
            let rep = verify_fixture(r.spin).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn printed_variants_are_not_kings() {
        let two = load_fixture(h(4)).unwrap();
        let printed = two.printed_state().unwrap();
        assert!(cumulative_pure(&printed, 2).unwrap() > 0.1);
        assert!(cumulative_pure(&two.state().unwrap(), 2).unwrap() < KILL_THRESHOLD);
        let five = load_fixture(h(10)).unwrap();
        // printed amplitudes do not normalize
        assert!(build_state(h(10), five.printed_amplitudes.unwrap(), false).is_err());
        assert!(cumulative_pure(&five.printed_state().unwrap(), 3).unwrap() > 1e-3);
        assert!(load_fixture(h(6)).unwrap().printed_state().is_none());
    }

    #[test]
    fn same_rows_match_their_design_order() {
        for r in all_fixtures() {
            let rep = verify_fixture(r.spin).unwrap();
            if r.design_relation == Relation::Same {
                assert_eq!(Some(rep.design_order), r.design_t, "S={}", r.spin);
            }
        }
    }

    #[test]
    fn cube_row() {
        let rep = verify_fixture(h(8)).unwrap();
        assert!(rep.a_claimed < 1e-10 && rep.a_next.unwrap() > 1e-6);
        assert_eq!(rep.design_order, 3);
    }

    #[test]
    fn seven_photon_rings() {
        let rep = verify_fixture(h(7)).unwrap();
        let heights: Vec<(f64, usize)> = rep.rings.iter().map(|r| (r.height, r.count)).collect();
        assert_eq!(heights.len(), 3);
        assert_eq!((heights[0].0, heights[0].1), (1.0, 1));
        assert!((heights[1].0 - 0.2424).abs() < 2e-4 && heights[1].1 == 3);
        assert!((heights[2].0 + 0.5816).abs() < 2e-4 && heights[2].1 == 3);
    }

    #[test]
    fn fourteen_photon_rings() {
        // two antipodal stars and four triangles about their common axis
        let rep = verify_fixture(h(14)).unwrap();
        let counts: Vec<usize> = rep.rings.iter().map(|r| r.count).collect();
        assert_eq!(counts, vec![1, 3, 3, 3, 3, 1]);
        assert!(
            (rep.rings[0].height - 1.0).abs() < 1e-9 && (rep.rings[5].height + 1.0).abs() < 1e-9
        );
    }

    #[test]
    fn twenty_photon_row_is_the_dodecahedron() {
        let rep = verify_fixture(h(20)).unwrap();
        assert!(rep.a_claimed < 1e-10);
        assert_eq!(rep.design_order, 5);
        assert!(constellation_match(&rep.constellation, &dodecahedron(), 1e-6).is_some());
        let from_solid = constellation_to_state(&dodecahedron());
        assert_eq!(unpolarization_order(&from_solid, 1e-10).unwrap(), 5);
    }

    #[test]
    fn dipole_free_iff_first_order() {
        for r in all_fixtures() {
            let st = r.state().unwrap();
            let v = stokes_expectation(&st);
            let zero_mean = v.iter().all(|x| x.abs() < 1e-10);
            assert_eq!(zero_mean, cumulative_pure(&st, 1).unwrap() < 1e-10);
            assert!(zero_mean);
        }
    }

    #[test]
    fn unpolarization_orders_match_claims() {
        for r in all_fixtures() {
            let order = unpolarization_order(&r.state().unwrap(), 1e-10).unwrap();
            assert_eq!(order, r.claimed_order, "S={}", r.spin);
        }
    }

    #[test]
    fn export_is_self_consistent() {
        let out = export_fixtures().unwrap();
        assert_eq!(out.len(), 13);
        let text = serde_json::to_string(&out).unwrap();
        let parsed: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
        for (item, ex) in parsed.iter().zip(&out) {
            let state: SpinState = serde_json::from_value(item["state"].clone()).unwrap();
            assert!((state.fidelity(&ex.state) - 1.0).abs() < 1e-15);
            let con: Constellation = serde_json::from_value(item["constellation"].clone()).unwrap();
            assert_eq!(con.len(), ex.record.spin.twice() as usize);
        }
        assert_eq!(parsed[2]["amplitudes"]["-1"], "sqrt(2/3)");
        assert_eq!(parsed[2]["printed_amplitudes"]["2"], "sqrt(2/3)");
    }
}
