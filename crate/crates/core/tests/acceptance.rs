//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use unpol::design::{
    cube, design_order, dodecahedron, icosahedron, octahedron, tetrahedron, DEFAULT_EPS,
};
use unpol::fixtures::{all_fixtures, load_fixture, verify_fixture};
use unpol::majorana::{constellation_match, constellation_to_state, state_constellation};
use unpol::metrology::{orthogonality_angle, sensitivity_scan};
use unpol::multipole::{
    cumulative_projector, cumulative_pure, highest_weight_cumulative, max_value,
    unpolarization_order,
};
use unpol::sampling::{random_euler, random_state};
use unpol::search::{minimize, objective_and_gradient, SearchConfig};
use unpol::spinstate::{basis_state, noon_state, rotate};
use unpol::HalfInt;

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

/// Outcome of one criterion; empty `failures` means it passed.
struct Check {
    failures: Vec<String>,
    summary: String,
}

impl Check {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            summary: String::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn criterion_1() -> Check {
    let mut c = Check::new();
    for r in all_fixtures() {
        let st = r.state().unwrap();
        let a = cumulative_pure(&st, r.claimed_order).unwrap();
        c.require(a < 1e-10, || {
            format!("S={} A_{} = {a:e}", r.spin, r.claimed_order)
        });
        if r.claimed_order < r.spin.twice() as i64 {
            let next = cumulative_pure(&st, r.claimed_order + 1).unwrap();
            c.require(next > 1e-6, || {
                format!("S={} A_{} = {next:e}", r.spin, r.claimed_order + 1)
            });
        }
    }
    c.summary = format!("{} rows", all_fixtures().len());
    c
}

fn criterion_2() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for twice in [2, 3, 4, 5, 6, 7, 8, 9, 10, 12] {
        let rec = load_fixture(h(twice)).unwrap();
        let order = if twice == 5 { 1 } else { rec.claimed_order };
        let cfg = SearchConfig {
            multistarts: 64,
            rng_seed: 2024,
            ..SearchConfig::new(h(twice), order)
        };
        let res = minimize(&cfg).unwrap();
        worst = worst.max(res.best_value);
        c.require(res.best_value < 1e-8, || {
            format!("S={} M={order}: best {:e}", h(twice), res.best_value)
        });
        if [4, 6, 8, 12].contains(&twice) {
            let found = state_constellation(&res.best_state);
            let target = state_constellation(&rec.state().unwrap());
            c.require(constellation_match(&found, &target, 1e-5).is_some(), || {
                format!("S={} constellation does not match the fixture", h(twice))
            });
        }
    }
    c.summary = format!("10 spins, worst best_value {worst:.1e}");
    c
}

fn criterion_3() -> Check {
    let mut c = Check::new();
    let cfg = SearchConfig {
        multistarts: 256,
        rng_seed: 7,
        ..SearchConfig::new(h(5), 2)
    };
    let res = minimize(&cfg).unwrap();
    c.require(res.best_value >= 1e-3, || {
        format!("best A_2 = {:e}", res.best_value)
    });
    c.summary = format!("S=5/2 M=2, 256 starts, best {:.6}", res.best_value);
    c
}

fn criterion_4() -> Check {
    let mut c = Check::new();
    for twice in 1..=20 {
        let top = basis_state(h(twice), h(twice)).unwrap();
        for m in 1..=twice as i64 {
            let (a, max) = (
                cumulative_pure(&top, m).unwrap(),
                max_value(h(twice), m).unwrap(),
            );
            c.require((a - max).abs() < 1e-11, || {
                format!("S={} M={m}: {a} vs {max}", h(twice))
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_excess = f64::NEG_INFINITY;
    for twice in 1..=10 {
        let maxima: Vec<f64> = (1..=twice as i64)
            .map(|m| max_value(h(twice), m).unwrap())
            .collect();
        for _ in 0..1000 {
            let st = random_state(h(twice), &mut rng);
            for (i, max) in maxima.iter().enumerate() {
                let excess = cumulative_pure(&st, i as i64 + 1).unwrap() - max;
                worst_excess = worst_excess.max(excess);
                c.require(excess <= 1e-10, || {
                    format!("S={} M={}: exceeds by {excess:e}", h(twice), i + 1)
                });
            }
        }
    }
    c.summary = format!("S<=10 highest weight; 10000 random states, max excess {worst_excess:.1e}");
    c
}

fn criterion_5() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for twice in [2, 3, 4, 6, 8] {
        for _ in 0..20 {
            let st = random_state(h(twice), &mut rng);
            for m in 1..=twice as i64 {
                let (a, b) = (
                    cumulative_projector(&st, m).unwrap(),
                    cumulative_pure(&st, m).unwrap(),
                );
                c.require((a - b).abs() < 1e-10, || {
                    format!("S={} M={m}: {a} vs {b}", h(twice))
                });
            }
        }
        let top = basis_state(h(twice), h(twice)).unwrap();
        for m in 1..=twice as i64 {
            let (a, b) = (
                highest_weight_cumulative(h(twice), m).unwrap(),
                cumulative_pure(&top, m).unwrap(),
            );
            c.require((a - b).abs() < 1e-11, || {
                format!("|S,S> S={} M={m}: {a} vs {b}", h(twice))
            });
        }
    }
    c.summary = "projector route and CG sum".into();
    c
}

fn criterion_6() -> Check {
    let mut c = Check::new();
    let t_max = 10;
    let solids = [
        ("tetrahedron", tetrahedron(), 2),
        ("octahedron", octahedron(), 3),
        ("cube", cube(), 3),
        ("icosahedron", icosahedron(), 5),
        ("dodecahedron", dodecahedron(), 5),
    ];
    let mut found = Vec::new();
    for (name, points, expect) in solids {
        let t = design_order(&points, t_max, DEFAULT_EPS);
        found.push(format!("{name}={t}"));
        c.require(t == expect, || {
            format!("{name}: design order {t}, expected {expect}")
        });
    }
    let st = load_fixture(h(20)).unwrap().state().unwrap();
    let order = unpolarization_order(&st, 1e-10).unwrap();
    c.require(order == 5, || {
        format!("S=10 fixture unpolarization order {order}, expected 5")
    });
    let t = design_order(&state_constellation(&st), t_max, DEFAULT_EPS);
    c.require(t != 5, || {
        format!("S=10 fixture constellation is a {t}-design, expected a non-5-design")
    });
    c.summary = format!("{}, S=10 fixture order {order} design {t}", found.join(" "));
    c
}

fn criterion_7() -> Check {
    let mut c = Check::new();
    let rep = verify_fixture(h(7)).unwrap();
    let heights: Vec<f64> = rep
        .rings
        .iter()
        .map(|r| r.height)
        .filter(|z| z.abs() < 1.0 - 1e-9)
        .collect();
    for target in [0.2424, -0.5816] {
        c.require(heights.iter().any(|z| (z - target).abs() < 2e-4), || {
            format!("no ring at {target}: {heights:?}")
        });
    }
    c.summary = format!(
        "ring heights {}",
        heights
            .iter()
            .map(|z| format!("{z:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    c
}

fn criterion_8() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for twice in 1..=12 {
        let ceiling = twice as f64 / (twice + 1) as f64;
        for _ in 0..100 {
            let a = cumulative_pure(&random_state(h(twice), &mut rng), twice as i64).unwrap();
            c.require((a - ceiling).abs() < 1e-11, || {
                format!("S={}: {a} vs {ceiling}", h(twice))
            });
        }
    }
    c.summary = "1200 random states".into();
    c
}

fn criterion_9() -> Check {
    let mut c = Check::new();
    for twice in [2, 4, 6, 10] {
        let s = twice as f64 / 2.0;
        let t =
            orthogonality_angle(&noon_state(h(twice)).unwrap(), [0.0, 0.0, 1.0], 1e-10).unwrap();
        c.require(t.is_some_and(|t| (t - PI / (2.0 * s)).abs() < 1e-9), || {
            format!("S={s}: {t:?}")
        });
    }
    for r in all_fixtures().iter().filter(|r| r.claimed_order >= 2) {
        let scan = sensitivity_scan(&r.state().unwrap(), 240, 9).unwrap();
        c.require(scan.max - scan.min < 1e-9, || {
            format!("fixture S={}: spread {:e}", r.spin, scan.max - scan.min)
        });
    }
    for twice in 4..=20 {
        let s = twice as f64 / 2.0;
        let scan = sensitivity_scan(&noon_state(h(twice)).unwrap(), 240, 9).unwrap();
        c.require(scan.max - scan.min > 0.5 * s * s, || {
            format!("N00N S={s}: spread {}", scan.max - scan.min)
        });
    }
    c.summary = "N00N angles, fixture isotropy, N00N anisotropy".into();
    c
}

fn central_differences(p: &[f64], spin: HalfInt, order: i64) -> Vec<f64> {
    let step = 1e-6;
    (0..p.len())
        .map(|i| {
            let (mut up, mut down) = (p.to_vec(), p.to_vec());
            up[i] += step;
            down[i] -= step;
            let fu = objective_and_gradient(&up, spin, order).unwrap().0;
            let fd = objective_and_gradient(&down, spin, order).unwrap().0;
            (fu - fd) / (2.0 * step)
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn criterion_10() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for twice in 1..=8 {
        for _ in 0..20 {
            let p: Vec<f64> = (0..2 * (twice as usize + 1))
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            // A_{2S} is constant on pure states: its gradient is zero and only an
            // absolute comparison is defined. S = 1/2 has no other order.
            let order = if twice == 1 {
                1
            } else {
                rng.random_range(1..twice as i64)
            };
            let g = objective_and_gradient(&p, h(twice), order).unwrap().1;
            let fd = central_differences(&p, h(twice), order);
            let diff = norm(&g.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
            if order == twice as i64 {
                c.require(norm(&g) < 1e-12 && diff < 1e-8, || {
                    format!("S={}: nonzero gradient at M=2S", h(twice))
                });
            } else {
                let rel = diff / norm(&g);
                worst = worst.max(rel);
                c.require(rel < 1e-5, || {
                    format!("S={} M={order}: relative error {rel:e}", h(twice))
                });
            }
        }
    }
    for twice in 1..=10 {
        for _ in 0..50 {
            let st = random_state(h(twice), &mut rng);
            let f = constellation_to_state(&state_constellation(&st)).fidelity(&st);
            c.require(f > 1.0 - 1e-9, || {
                format!("S={} round-trip fidelity {f}", h(twice))
            });
        }
    }
    for r in all_fixtures() {
        let st = r.state().unwrap();
        let moved = rotate(&st, &random_euler(&mut rng));
        for m in 1..=r.spin.twice() as i64 {
            let (a, b) = (
                cumulative_pure(&st, m).unwrap(),
                cumulative_pure(&moved, m).unwrap(),
            );
            c.require((a - b).abs() < 1e-10, || {
                format!("fixture S={} M={m}: {a} vs {b}", r.spin)
            });
        }
    }
    c.summary = format!("gradient rel. error <= {worst:.1e}, round trips, rotation invariance");
    c
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        ("tabulated states verify", criterion_1),
        ("search reproduces tabulated orders", criterion_2),
        ("no S=5/2 second-order state found", criterion_3),
        ("closed-form maximum", criterion_4),
        ("projector identity", criterion_5),
        ("design orders", criterion_6),
        ("S=7/2 ring heights", criterion_7),
        ("purity ceiling", criterion_8),
        ("metrology", criterion_9),
        ("numerical hygiene", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let check = run();
        let secs = start.elapsed().as_secs_f64();
        let verdict = if check.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "{verdict} criterion {:>2}: {name} ({}) [{secs:.1}s]",
            i + 1,
            check.summary
        );
        for f in check.failures.iter().take(5) {
            println!("    {f}");
        }
        failed += usize::from(!check.failures.is_empty());
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
