//! Acceptance suite. Prints one PASS/FAIL line per check, grouped by
//! criterion, and exits nonzero only on checks not listed in `KNOWN_RED`.

use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sagesimplex::certificates::{self, SageMode, SageOptions, SageOutcome};
use sagesimplex::geometry::{self, ConvexRegion, MomentMode};
use sagesimplex::signomial::{self, ExponentVector, Signomial};
use sagesimplex::solver::{self, FnObjective, Objective};
use sagesimplex::{decompose, oracle, univariate};
use sagesimplex_cli::{
    cmd_check, cmd_decompose, cmd_minimize, CheckMode, DecomposeFlags, Problem, Region, Settings, EXIT_CERTIFIED,
    EXIT_INCONCLUSIVE, EXIT_INPUT,
};

/// Checks expected to fail, with the reason. They still print FAIL.
const KNOWN_RED: &[(&str, &str)] = &[(
    "7.d2-constant",
    "the closed form for d_beta2 evaluates to -3.082988, not the stated -3.083420; \
     c2 = 0.581977 from the same construction matches",
)];

struct Report {
    lines: Vec<(String, bool, String)>,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, detail: impl Into<String>) {
        self.lines.push((id.to_string(), ok, detail.into()));
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn problem(name: &str) -> Problem {
    let src = std::fs::read_to_string(fixtures().join(name)).unwrap();
    Problem::parse(&src).unwrap()
}

fn region(name: &str) -> Region {
    let src = std::fs::read_to_string(fixtures().join(name)).unwrap();
    Region::parse(&src).unwrap()
}

fn bin(args: &[&str]) -> (i32, serde_json::Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_sagesimplex"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap_or(-1), json)
}

fn ev(v: &[f64]) -> ExponentVector {
    ExponentVector::new(v.to_vec()).unwrap()
}

fn near(p: &[f64], q: &[f64], tol: f64) -> bool {
    p.iter().zip(q).all(|(a, b)| (a - b).abs() <= tol)
}

fn f64_at(v: &serde_json::Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for p in path {
        cur = &cur[*p];
    }
    cur.as_f64().unwrap_or(f64::NAN)
}

fn vec_at(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().map(|a| a.iter().filter_map(|x| x.as_f64()).collect()).unwrap_or_default()
}

fn criterion_1(r: &mut Report) {
    let s = Settings::default();
    let f = problem("quartic_pair.json");
    let out = cmd_minimize(&f, &region("fullspace2.json"), &s);
    let v = f64_at(&out.json, &["value"]);
    let x = vec_at(&out.json["argmin"]);
    let h = 2f64.sqrt().ln();
    r.check("1.global-value", (v + 7.0).abs() <= 1e-4, format!("min = {v:.9}"));
    r.check("1.global-argmin", x.len() == 2 && near(&x, &[h, h], 1e-3), format!("argmin = {x:?}"));
    let s40 = Settings { grid_depth: 40, ..Settings::default() };
    let out = cmd_minimize(&f, &region("triangle.json"), &s40);
    let v = f64_at(&out.json, &["value"]);
    let x = vec_at(&out.json["argmin"]);
    r.check("1.triangle-value", v.abs() <= 1e-3, format!("min = {v:.3e}"));
    r.check("1.triangle-argmin", x.len() == 2 && near(&x, &[0.0, 0.0], 1e-2), format!("argmin = {x:?}"));
}

fn criterion_2(r: &mut Report) {
    let out = cmd_decompose(
        &problem("quartic_pair_shift7.json"),
        &region("fullspace2.json"),
        &DecomposeFlags::default(),
        &Settings::default(),
    );
    r.check("2.exit", out.code == EXIT_CERTIFIED, format!("exit {}", out.code));
    let parts = out.json["parts"].as_array().cloned().unwrap_or_default();
    r.check("2.two-parts", parts.len() == 2, format!("{} parts", parts.len()));
    let want = [[16.0, 0.5, 0.5, -12.0], [4.0, 0.5, 0.5, -3.0]];
    let got: Vec<Vec<f64>> = parts
        .iter()
        .map(|p| {
            let mut c = vec_at(&p["coeffs"]);
            c.push(p["d"].as_f64().unwrap_or(f64::NAN));
            c
        })
        .collect();
    let matched = want
        .iter()
        .all(|w| got.iter().any(|g| g.len() == 4 && near(g, w, 1e-3)));
    r.check("2.coefficients", matched, format!("parts = {got:?}"));
}

fn criterion_3(r: &mut Report) {
    let t1 = certificates::circuit_number(&[16.0, 0.5, 0.5], &[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]);
    let t2 = certificates::circuit_number(&[4.0, 0.5, 0.5], &[1.0 / 3.0; 3]);
    r.check("3.theta-12", (t1 - 12.0).abs() <= 1e-9, format!("{t1:.12}"));
    r.check("3.theta-3", (t2 - 3.0).abs() <= 1e-9, format!("{t2:.12}"));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checked, mut worst) = (0, 0.0_f64);
    let mut tries = 0;
    while checked < 100 && tries < 10_000 {
        tries += 1;
        let n = rng.gen_range(1..=4);
        let vs: Vec<Vec<f64>> = (0..=n).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let a: Vec<ExponentVector> = vs.iter().map(|v| ev(v)).collect();
        if !signomial::is_affinely_independent(&a) {
            continue;
        }
        let raw: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let lam: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let beta: Vec<f64> = (0..n).map(|k| vs.iter().zip(&lam).map(|(v, l)| v[k] * l).sum()).collect();
        let c: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.2..3.0)).collect();
        let theta = certificates::circuit_number(&c, &lam);
        // A large box: the minimizer is interior, so the constrained value is −Θ.
        let x = ConvexRegion::cuboid(&vec![-40.0; n], &vec![40.0; n]).unwrap();
        let sol = solver::minimize_entropy_sigma(&c, &ev(&beta), &a, &x, 1e-13).unwrap();
        if !sol.dual_point.as_ref().is_some_and(|p| p.iter().all(|v| v.abs() < 39.0)) {
            continue;
        }
        worst = worst.max((sol.value + theta).abs() / theta);
        checked += 1;
    }
    r.check(
        "3.entropy-vs-theta",
        checked == 100 && worst <= 1e-7,
        format!("{checked} instances, worst relative error {worst:.2e}"),
    );
}

fn criterion_4(r: &mut Report) {
    let f = problem("twin_root.json").f;
    let Region::X(x) = region("box_2x1.json") else { unreachable!() };
    let g = oracle::grid_min(&f, &x, 200).unwrap();
    r.check("4.grid-min", g.value.abs() <= 1e-6, format!("min = {:.3e}", g.value));
    let has = |q: [f64; 2]| g.candidates.iter().any(|(p, _)| near(p, &q, 1e-3));
    r.check(
        "4.both-minimizers",
        has([2f64.ln(), 0.0]) && has([3f64.ln(), 0.0]),
        format!("best-5 = {:?}", g.candidates.iter().map(|c| &c.0).collect::<Vec<_>>()),
    );
    let part = signomial::partition_support(&f, None).unwrap();
    let out = certificates::sage_membership(&part, &x, SageMode::SignedNonnegC, &SageOptions::default()).unwrap();
    let slack = match &out {
        SageOutcome::NotFound { search } => search.best_slack,
        _ => f64::NAN,
    };
    r.check("4.sage-not-found", !out.is_member(), format!("best slack {slack:.4}"));
    let (code, _) = bin(&["check", "twin_root.json", "--region", "box_2x1.json", "--mode", "constrained"]);
    r.check("4.check-exit-2", code == EXIT_INCONCLUSIVE, format!("exit {code}"));
    let (code, _) = bin(&["check", "twin_root.json", "--region", "box_2x2.json", "--mode", "constrained"]);
    r.check("4.check-exit-2-square", code == EXIT_INCONCLUSIVE, format!("exit {code}"));
}

fn criterion_5(r: &mut Report) {
    for (c2, file) in [(-4.9, "univariate_twin_root_m4p9.json"), (-4.5, "univariate_twin_root_m4p5.json"), (-4.1, "univariate_twin_root_m4p1.json")] {
        let p = problem(file);
        let z = 2f64.ln();
        let fz = p.f.eval(&[z]);
        let dz = p.f.derivative(0).eval(&[z]);
        let f0 = p.f.eval(&[0.0]);
        r.check(
            &format!("5.double-root[{c2}]"),
            fz.abs() <= 1e-9 && dz.abs() <= 1e-7 && f0 > 0.0,
            format!("f(ln2) = {fz:.1e}, f'(ln2) = {dz:.1e}, f(0) = {f0:.3}"),
        );
        let (code, json) = bin(&["decompose", file, "fullspace1.json"]);
        r.check(
            &format!("5.ineligible[{c2}]"),
            code == EXIT_INPUT,
            format!("exit {code}: {}", json["diagnostics"]["reasons"]),
        );
    }
}

fn criterion_6(r: &mut Report) {
    let z = [0.0_f64, 2f64.ln()];
    // (t − e^{z1})²(t − e^{z2})² expanded in t = e^x.
    let (p, q) = (z[0].exp(), z[1].exp());
    let lin = [p * q, -(p + q), 1.0];
    let mut coeffs = [0.0; 5];
    for i in 0..3 {
        for j in 0..3 {
            coeffs[i + j] += lin[i] * lin[j];
        }
    }
    let restricted = Signomial::new(1, coeffs.iter().enumerate().map(|(k, c)| (*c, vec![k as f64]))).unwrap();
    let fixture = problem("squared_line_1d.json").f;
    r.check("6.expansion", restricted == fixture, format!("coefficients {coeffs:?}"));
    let g = oracle::grid_min(&restricted, &ConvexRegion::interval(-10.0, 10.0).unwrap(), 20_000).unwrap();
    r.check("6.oracle-min", g.value.abs() <= 1e-6, format!("min = {:.2e} at {:?}", g.value, g.argmin));
    let f = problem("squared_line.json").f;
    let Region::X(line) = region("squared_line_region.json") else { unreachable!() };
    let part = signomial::partition_support(&f, None).unwrap();
    let out = certificates::sage_membership(&part, &line, SageMode::SignedNonnegC, &SageOptions::default()).unwrap();
    let slack = match &out {
        SageOutcome::NotFound { search } => search.best_slack,
        _ => f64::NAN,
    };
    r.check("6.sage-not-found", !out.is_member(), format!("best slack {slack:.4}"));
}

fn criterion_7(r: &mut Report) {
    let cases: [(&str, Vec<f64>, ConvexRegion, univariate::Verdict); 3] = [
        (
            "half-line",
            vec![-1.0, -2.0],
            ConvexRegion::interval(0.0, f64::INFINITY).unwrap(),
            univariate::Verdict::Coincide,
        ),
        ("line", vec![0.3, 0.7], ConvexRegion::full_space(1), univariate::Verdict::Coincide),
        ("unit", vec![-1.0, 0.5], ConvexRegion::interval(0.0, 1.0).unwrap(), univariate::Verdict::Differ),
    ];
    for (name, b, x, want) in cases {
        let c = univariate::cone_coincidence(0.0, 1.0, &b, &x).unwrap();
        r.check(&format!("7.verdict-{name}"), c.verdict == want, format!("{:?}", c.verdict));
    }
    let x = ConvexRegion::interval(0.0, 1.0).unwrap();
    let ce = univariate::counterexample([0.0, 1.0], [-1.0, 0.5], &x, 1.0).unwrap();
    r.check("7.c2", (ce.c2 - 0.581977).abs() <= 1e-5, format!("c2 = {:.6}", ce.c2));
    let closed = 2.0 / (1.0 - 0.5f64.exp());
    r.check("7.d2-formula", (ce.d2 - closed).abs() <= 1e-9, format!("d2 = {:.6}, closed form {closed:.6}", ce.d2));
    r.check("7.d2-constant", (ce.d2 + 3.083420).abs() <= 1e-5, format!("d2 = {:.6} vs -3.083420", ce.d2));
    let g = oracle::grid_min(&ce.signomial, &x, 20_000).unwrap();
    r.check("7.oracle-min", g.value.abs() <= 1e-6, format!("min = {:.2e}", g.value));
    let part = signomial::partition_support(&ce.signomial, None).unwrap();
    let out = certificates::sage_membership(&part, &x, SageMode::SignedNonnegC, &SageOptions::default()).unwrap();
    let slack = match &out {
        SageOutcome::NotFound { search } => search.best_slack,
        _ => f64::NAN,
    };
    // The best split still misses by more than 1e-3.
    r.check("7.sage-not-found", !out.is_member() && slack < -1e-3, format!("best slack {slack:.4}"));
    let (code, json) = bin(&[
        "univariate",
        "counterexample",
        "--alpha1",
        "0",
        "--alpha2",
        "1",
        "--beta1",
        "-1",
        "--beta2",
        "0.5",
        "--lower",
        "0",
        "--upper",
        "1",
        "--b",
        "1",
    ]);
    r.check(
        "7.cli-self-check",
        code == EXIT_CERTIFIED && json["check_exit"] == 2,
        format!("exit {code}, self-check exit {}", json["check_exit"]),
    );
}

fn criterion_8(r: &mut Report) {
    let p = problem("threed.json");
    let Region::Moment(y) = region("threed_moment.json") else { unreachable!() };
    let out = cmd_decompose(&p, &Region::Moment(y.clone()), &DecomposeFlags::default(), &Settings::default());
    r.check("8.exit", out.code == EXIT_CERTIFIED, format!("exit {}", out.code));
    let parts = out.json["parts"].as_array().cloned().unwrap_or_default();
    let coeffs = |beta: [f64; 3]| {
        parts
            .iter()
            .find(|q| near(&vec_at(&q["beta"]), &beta, 1e-12))
            .map(|q| vec_at(&q["coeffs"]))
            .unwrap_or_default()
    };
    let c1 = coeffs([0.6, 0.2, 0.2]);
    let c2 = coeffs([0.2, 0.6, 0.2]);
    r.check("8.first-part", c1.len() == 4 && near(&c1, &[0.1, 0.2, 0.0, 0.2], 1e-2), format!("{c1:?}"));
    r.check("8.second-part", c2.len() == 4 && near(&c2, &[0.3, -0.2, 0.0, 0.4], 1e-2), format!("{c2:?}"));
    r.check(
        "8.negative-coefficient",
        c2.get(1).is_some_and(|v| (v + 0.2).abs() <= 1e-2),
        format!("coefficient on e^x1 = {:?}", c2.get(1)),
    );
    let part = signomial::partition_support(&p.f, p.declared.as_deref()).unwrap();
    let obj = solver::MomentObjective::from_partition(&part, 0).unwrap();
    let grad = obj.gradient(&[1.0, 1.0, 1.0]);
    r.check(
        "8.gradient",
        near(&grad, &[-0.4, -0.4, 0.4], 1e-9),
        format!("{grad:?}"),
    );
    r.check(
        "8.moment-region",
        y.atoms().is_some_and(|a| a.len() == 4),
        "moment vertices v3 = v1 + v2 - 1",
    );
}

/// Condensed random re-runs of the property suites, plus certificate
/// soundness over every fixture problem and matching region.
fn criterion_9(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let mut ok = true;
    for _ in 0..200 {
        let n = rng.gen_range(1..=3);
        let vs: Vec<Vec<f64>> = (0..=n).map(|_| (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let a: Vec<ExponentVector> = vs.iter().map(|v| ev(v)).collect();
        if !signomial::is_affinely_independent(&a) {
            continue;
        }
        let raw: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let t: f64 = raw.iter().sum();
        let lam: Vec<f64> = raw.iter().map(|x| x / t).collect();
        let beta: Vec<f64> = (0..n).map(|k| vs.iter().zip(&lam).map(|(v, l)| v[k] * l).sum()).collect();
        let b = signomial::barycentric(&a, &ev(&beta)).unwrap();
        let back: Vec<f64> = (0..n).map(|k| vs.iter().zip(&b.weights).map(|(v, l)| v[k] * l).sum()).collect();
        ok &= b.in_hull && near(&back, &beta, 1e-9);
    }
    r.check("9.barycentric", ok, "200 random simplices");

    let mut ok = true;
    for _ in 0..200 {
        let verts: Vec<Vec<f64>> = (0..rng.gen_range(1..6)).map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]).collect();
        let x = ConvexRegion::polytope(verts, vec![]).unwrap();
        let y1 = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let y2 = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let t = rng.gen_range(0.0..10.0);
        let (s1, s2) = (x.support_function(&y1), x.support_function(&y2));
        ok &= x.support_function(&[y1[0] + y2[0], y1[1] + y2[1]]) <= s1 + s2 + 1e-9;
        ok &= (x.support_function(&[t * y1[0], t * y1[1]]) - t * s1).abs() <= 1e-9 * (1.0 + t * s1.abs());
    }
    r.check("9.support-sublinear", ok, "200 random polytopes");

    let mut ok = true;
    for _ in 0..200 {
        let u: Vec<f64> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(0.01..5.0)).collect();
        let v: Vec<f64> = u.iter().map(|x| x * rng.gen_range(0.1..3.0)).collect();
        let t = rng.gen_range(0.01..20.0);
        let d = certificates::relative_entropy(&u, &v);
        let tu: Vec<f64> = u.iter().map(|x| t * x).collect();
        let tv: Vec<f64> = v.iter().map(|x| t * x).collect();
        ok &= (certificates::relative_entropy(&tu, &tv) - t * d).abs() <= 1e-9 * (1.0 + (t * d).abs());
    }
    r.check("9.entropy-scaling", ok, "200 random pairs");

    let vs = [vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]];
    let a: Vec<ExponentVector> = vs.iter().map(|v| ev(v)).collect();
    let tri = ConvexRegion::polytope(vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![0.0, 1.0]], vec![]).unwrap();
    let mut ok = true;
    for _ in 0..100 {
        let c: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..5.0)).collect();
        let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        let t: f64 = raw.iter().sum();
        let beta = ev(&[2.0 * raw[1] / t, 2.0 * raw[2] / t]);
        let d = rng.gen_range(-10.0..0.0);
        let bump = rng.gen_range(0.0..5.0);
        let lo = certificates::age_constrained(&c, d, &beta, &a, &tri).unwrap();
        let hi = certificates::age_constrained(&c, d + bump, &beta, &a, &tri).unwrap();
        ok &= (!lo.feasible || hi.feasible) && hi.slack >= lo.slack - 1e-12;
    }
    r.check("9.age-monotone-in-d", ok, "100 random circuits");

    let mut ok = true;
    for _ in 0..100 {
        let atoms: Vec<Vec<f64>> = (0..rng.gen_range(2..12)).map(|_| vec![rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)]).collect();
        let tg = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let obj = FnObjective {
            f: |v: &[f64]| (v[0] - tg[0]).powi(2) + 2.0 * (v[1] - tg[1]).powi(2),
            g: |v: &[f64]| vec![2.0 * (v[0] - tg[0]), 4.0 * (v[1] - tg[1])],
        };
        let res = solver::minimize_fw(&obj, &atoms, 1e-9, 10_000).unwrap();
        ok &= res.report.history.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let mut best = f64::INFINITY;
        for p in &atoms {
            for q in &atoms {
                for k in 0..=100 {
                    let t = k as f64 / 100.0;
                    best = best.min(obj.value(&[p[0] * (1.0 - t) + q[0] * t, p[1] * (1.0 - t) + q[1] * t]));
                }
            }
        }
        ok &= res.report.value - res.report.gap <= best + 1e-9;
    }
    r.check("9.fw-descent-and-gap", ok, "100 random quadratics");

    let (mut ok, mut resum) = (true, 0.0_f64);
    let vs = [vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 3.0]];
    for _ in 0..50 {
        let c: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..5.0)).collect();
        let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        let t: f64 = raw.iter().sum();
        let lam: Vec<f64> = raw.iter().map(|x| x / t).collect();
        let beta = vec![3.0 * lam[1], 3.0 * lam[2]];
        if (beta[0] - 0.75).abs() < 1e-3 && (beta[1] - 0.75).abs() < 1e-3 {
            continue;
        }
        let theta = certificates::circuit_number(&c, &lam);
        let f = Signomial::new(
            2,
            [
                (c[0] + theta + 1.0, vs[0].clone()),
                (c[1], vs[1].clone()),
                (c[2], vs[2].clone()),
                (rng.gen_range(-3.0..-0.1), beta),
                (-0.5, vec![0.75, 0.75]),
            ],
        )
        .unwrap();
        let part = signomial::partition_support(&f, None).unwrap();
        let y = geometry::build_moment_region(&ConvexRegion::full_space(2), &part.positive, 0, MomentMode::ExactPolytopeVertices)
            .unwrap();
        let obj = solver::MomentObjective::from_partition(&part, 0).unwrap();
        let step = decompose::fenchel_split(&obj, 0, &y, &[false, false], 1e-12).unwrap();
        let mono = &obj.monomials[0];
        let h = |v: &[f64]| -mono.coeff * mono.base(v);
        let tangent = |v: &[f64]| step.gamma + step.y_star.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let probe = [rng.gen_range(0.01..20.0), rng.gen_range(0.01..20.0)];
        ok &= h(&probe) <= tangent(&probe) + 1e-9 * (1.0 + h(&probe).abs());
        ok &= (h(&step.v_star) - tangent(&step.v_star)).abs() <= 1e-9 * (1.0 + h(&step.v_star).abs());

        let min = solver::moment_program(&part, &y, 1e-12).unwrap().report.value;
        let shifted = f.add_constant(-min + 1e-3);
        let part = signomial::partition_support(&shifted, None).unwrap();
        match decompose::decompose(&part, &y, &decompose::DecomposeOptions::default()) {
            Ok(dec) => {
                let check = decompose::verify_decomposition(&dec, &shifted, None, Some(&y), 0);
                resum = resum.max(check.resummation_residual / shifted.coeff_scale().max(1.0));
                ok &= check.pass;
            }
            Err(_) => ok = false,
        }
    }
    r.check("9.tangent-majorizes-and-touches", ok, "50 random two-circuit instances");
    r.check("9.resummation-exact", ok && resum <= 1e-12, format!("worst relative residual {resum:.1e}"));

    let mut ok = true;
    for _ in 0..500 {
        let mut coeffs = vec![if rng.gen_bool(0.5) { 1.0 } else { -1.0 }];
        for _ in 0..rng.gen_range(0..3) {
            let root: f64 = rng.gen_range(-1.5..1.5);
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * root.exp();
            }
            coeffs = next;
        }
        for _ in 0..rng.gen_range(0..3) {
            let k = rng.gen_range(0..4);
            if k < coeffs.len() {
                coeffs[k] += 0.1 * rng.gen_range(-3.0..3.0);
            }
        }
        let f = Signomial::new(1, coeffs.iter().enumerate().map(|(i, c)| (*c, vec![i as f64]))).unwrap();
        if f.is_empty() {
            continue;
        }
        ok &= univariate::count_roots_bound_check(&f, -4.0, 4.0, 4000).unwrap().pass;
    }
    r.check("9.descartes-bound", ok, "500 random univariate instances");

    let s = Settings::default();
    let (mut pairs, mut conflicts) = (0, Vec::new());
    let mut files: Vec<_> = std::fs::read_dir(fixtures()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let problems: Vec<(String, Problem)> = files
        .iter()
        .filter_map(|p| {
            let src = std::fs::read_to_string(p).ok()?;
            Some((p.file_name()?.to_string_lossy().into_owned(), Problem::parse(&src).ok()?))
        })
        .collect();
    let regions: Vec<(String, ConvexRegion)> = files
        .iter()
        .filter_map(|p| {
            let src = std::fs::read_to_string(p).ok()?;
            match Region::parse(&src).ok()? {
                Region::X(x) => Some((p.file_name()?.to_string_lossy().into_owned(), x)),
                Region::Moment(_) => None,
            }
        })
        .collect();
    for (pn, p) in &problems {
        for (rn, x) in regions.iter().filter(|(_, x)| x.dimension() == p.f.dimension()) {
            for mode in [CheckMode::Constrained, CheckMode::Sage] {
                let out = cmd_check(p, Some(&Region::X(x.clone())), mode, &s);
                pairs += 1;
                if out.code != EXIT_CERTIFIED {
                    continue;
                }
                if let Some(w) = oracle::falsify(&p.f, x, 20_000, 1234) {
                    conflicts.push(format!("{pn} on {rn} ({mode:?}): f({w:?}) = {:.3e}", p.f.eval(&w)));
                }
            }
        }
    }
    r.check(
        "9.certificate-soundness",
        conflicts.is_empty() && pairs > 0,
        format!("{pairs} check runs, conflicts: {conflicts:?}"),
    );
}

fn criterion_cli(r: &mut Report) {
    let (code, _) = bin(&["check", "quartic_pair_shift7.json", "--mode", "global"]);
    r.check("cli.check-certified", code == 0, format!("exit {code}"));
    let (code, json) = bin(&["check", "quartic_pair_shift701.json", "--mode", "global"]);
    r.check(
        "cli.check-falsified",
        code == 1 && f64_at(&json, &["witness", "f"]) < 0.0,
        format!("exit {code}, witness {}", json["witness"]),
    );
    let (code, _) = bin(&["check", "bad.json"]);
    r.check("cli.malformed-input", code == 3, format!("exit {code}"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tri.csv");
    let (code, _) = bin(&["sample", "quartic_pair.json", "triangle.json", "--grid-depth", "20", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    let min = text
        .lines()
        .skip(1)
        .filter_map(|l| l.rsplit(',').next()?.parse::<f64>().ok())
        .fold(f64::INFINITY, f64::min);
    r.check(
        "cli.sample-triangle",
        code == 0 && text.starts_with("x1,x2,f\n") && min.abs() < 1e-9,
        format!("exit {code}, min f column {min:.2e}"),
    );
    let (code, _) = bin(&["sample", "quartic_pair.json", "fullspace2.json", "--out", out.to_str().unwrap()]);
    r.check("cli.sample-unbounded", code == 3, format!("exit {code}"));
    let moment = sagesimplex_cli::moment_csv_path(&out);
    r.check("cli.moment-csv", moment.exists(), moment.display().to_string());
}

fn main() {
    let mut r = Report { lines: Vec::new() };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_cli(&mut r);

    let mut unexpected = Vec::new();
    for (id, ok, detail) in &r.lines {
        let known = KNOWN_RED.iter().find(|(k, _)| k == id);
        println!("{} {id}: {detail}", if *ok { "PASS" } else { "FAIL" });
        match (ok, known) {
            (false, Some((_, why))) => println!("     known red: {why}"),
            (false, None) => unexpected.push(id.clone()),
            (true, Some(_)) => println!("     listed as known red but passed"),
            (true, None) => {}
        }
    }
    let passed = r.lines.iter().filter(|l| l.1).count();
    println!("{passed}/{} checks passed, {} known red", r.lines.len(), r.lines.len() - passed - unexpected.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
