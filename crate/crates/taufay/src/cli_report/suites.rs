//! The eight suites. Each builds its random inputs up front from its own
//! seeded stream, then evaluates independent checks through [`exec::map`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use crate::divisors::Divisor;
use crate::exec::{self, Exec};
use crate::formal_core::{GradedSeries, Var};
use crate::hirota_fay::symbolic::bilinear_form;
use crate::hirota_fay::{
    dmu, fay_n2_residual, hirota_residual, kp_bilinear_form, kp_log_form, kp_residual,
    kp_residual_first_derivative_variant, reproducing_numeric, reproducing_residual, wn_determinantal_residual,
    DiffPoly, TauContext,
};
use crate::matrix_tau::{fay_matrix_residual, MatrixTauContext, PotentialSpec};
use crate::riemann_geometry::forms::{round_trip_error, Component, MeromorphicForm};
use crate::riemann_geometry::szego::a_cycle_chain;
use crate::riemann_geometry::{Characteristic, ComplexRecord, SurfaceContext, SzegoKernel, Theta};
use crate::spectral_curve::{
    convergence_radius, newton_taylor, series_terms, solve_shift, zeta_partial_sum, zeta_series, SpectralCurve,
};
use crate::theta_tau::{fay_surface_residual, fay_surface_residual_zero_form};

use super::config::SuiteConfig;
use super::report::{CheckRecord, Comparison, PlotPoint};
use super::sampling::{avoiding, cell, separated, square, stream, unit_complex};
use super::{ReportError, Suite};

use Comparison::{Above, Below, Exact};

pub struct SuiteOutput {
    pub checks: Vec<CheckRecord>,
    pub plot: Vec<PlotPoint>,
}

type Task<'a> = Box<dyn Fn() -> Vec<CheckRecord> + Send + Sync + 'a>;

fn run_tasks(exec: Exec, tasks: Vec<Task<'_>>) -> Vec<CheckRecord> {
    exec::map(exec, &tasks, |t| t()).into_iter().flatten().collect()
}

fn cx(r: &ComplexRecord) -> Complex64 {
    Complex64::from(*r)
}

fn cj(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn cjs(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| cj(z)).collect())
}

fn potential(times: &[ComplexRecord]) -> Result<PotentialSpec, String> {
    PotentialSpec::new(times.iter().map(cx).collect()).map_err(|e| e.to_string())
}

/// A failed setup step becomes one failing check, so the report still says
/// what went wrong.
fn setup_failure(id: &str, what: &str, e: impl std::fmt::Display) -> CheckRecord {
    CheckRecord::new(id, what, Value::Null, Err::<f64, _>(e), 0.0, Below)
}

pub fn run_one(suite: Suite, cfg: &SuiteConfig, exec: Exec) -> Result<SuiteOutput, ReportError> {
    match suite {
        Suite::HirotaOps => Ok(hirota_ops(cfg, exec)),
        Suite::HirotaFormal => Ok(hirota_formal(cfg, exec)),
        Suite::FayGenus0 => fay_genus0(cfg, exec),
        Suite::FayGenus1 => fay_genus1(cfg, exec),
        Suite::ThetaProps => Ok(theta_props(cfg, exec)),
        Suite::AiryShift => Ok(airy_shift(cfg, exec)),
        Suite::MatrixFay => Ok(matrix_fay(cfg, exec)),
        Suite::Decomposition => decomposition(cfg, exec),
        Suite::All => unreachable!("expanded by the caller"),
    }
}

fn mu_tag(mu: &[u32]) -> String {
    if mu.is_empty() {
        "empty".into()
    } else {
        mu.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("-")
    }
}

/// Multiplicity vectors μ with Σ j·μⱼ = w, trailing zeros trimmed.
fn partitions(w: u32) -> Vec<Vec<u32>> {
    fn go(rest: u32, largest: u32, parts: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            let len = parts.first().copied().unwrap_or(0) as usize;
            let mut mu = vec![0; len];
            for &p in parts.iter() {
                mu[p as usize - 1] += 1;
            }
            out.push(mu);
            return;
        }
        for p in (1..=largest.min(rest)).rev() {
            parts.push(p);
            go(rest - p, p, parts, out);
            parts.pop();
        }
    }
    let mut out = Vec::new();
    go(w, w, &mut Vec::new(), &mut out);
    out
}

fn exact(ok: bool) -> Result<f64, String> {
    Ok(if ok { 0.0 } else { 1.0 })
}

fn sym(s: char, a: &[u32]) -> DiffPoly {
    DiffPoly::derivative_symbol(s, a)
}

fn rat(n: i64, d: i64) -> num_rational::BigRational {
    num_rational::BigRational::new(n.into(), d.into())
}

fn hirota_ops(cfg: &SuiteConfig, exec: Exec) -> SuiteOutput {
    let c = &cfg.hirota_ops;
    let mut tasks: Vec<Task> = Vec::new();
    for g in &c.goldens {
        tasks.push(Box::new(move || {
            let op = dmu(&g.mu);
            let got = op.to_string();
            let tag = mu_tag(&g.mu);
            vec![
                CheckRecord::new(
                    format!("hirota_ops/dmu/{tag}"),
                    "bilinear operator D_mu in canonical text form",
                    json!({"mu": g.mu, "expected": g.expected, "got": got}),
                    exact(got == g.expected),
                    0.0,
                    Exact,
                ),
                CheckRecord::new(
                    format!("hirota_ops/odd_part/{tag}"),
                    "odd part of D_mu vanishes in the symmetric bilinear form",
                    json!({"mu": g.mu}),
                    exact(bilinear_form(&op.odd_part()).is_zero()),
                    0.0,
                    Exact,
                ),
            ]
        }));
    }
    tasks.push(Box::new(|| {
        let t = |a: &[u32]| sym('T', a);
        let expected = t(&[])
            .mul(&t(&[0, 2]))
            .sub(&t(&[0, 1]).mul(&t(&[0, 1])))
            .add(
                &t(&[])
                    .mul(&t(&[4]))
                    .sub(&t(&[1]).mul(&t(&[3])).scale(&rat(4, 1)))
                    .add(&t(&[2]).mul(&t(&[2])).scale(&rat(3, 1)))
                    .scale(&rat(1, 12)),
            )
            .sub(&t(&[]).mul(&t(&[1, 0, 1])))
            .add(&t(&[1]).mul(&t(&[0, 0, 1])));
        let got = kp_bilinear_form();
        let f = |a: &[u32]| sym('F', a);
        let expected_log = f(&[0, 2])
            .add(&f(&[4]).scale(&rat(1, 12)))
            .add(&f(&[2]).mul(&f(&[2])).scale(&rat(1, 2)))
            .sub(&f(&[1, 0, 1]));
        let got_log = kp_log_form();
        vec![
            CheckRecord::new(
                "hirota_ops/kp/bilinear",
                "KP equation from D_(0,0,1) in bilinear form",
                json!({"expected": expected.to_string(), "got": got.to_string()}),
                exact(got == expected),
                0.0,
                Exact,
            ),
            CheckRecord::new(
                "hirota_ops/kp/logarithmic",
                "KP equation from D_(0,0,1) in terms of F = ln T",
                json!({"expected": expected_log.to_string(), "got": got_log.to_string()}),
                exact(got_log == expected_log),
                0.0,
                Exact,
            ),
        ]
    }));
    tasks.push(Box::new(move || {
        let (p, q, a) = (Complex64::new(0.7, 0.2), Complex64::new(-0.4, 0.5), Complex64::new(0.3, -0.1));
        let n = c.soliton_truncation;
        let inputs = json!({"p": cj(p), "q": cj(q), "phase": cj(a), "truncation": n});
        let log_tau = (|| {
            let mut lin = GradedSeries::constant(a, n);
            for k in 1..=n {
                let w = (p.powu(k) - q.powu(k)) / k as f64;
                lin = lin.add(&GradedSeries::time(k, n).scale(&w));
            }
            let tau = GradedSeries::one(n).add(&lin.exp()?);
            tau.log()
        })();
        let res = |variant: bool| -> Result<f64, String> {
            let f = log_tau.as_ref().map_err(|e| e.to_string())?;
            let r = if variant {
                kp_residual_first_derivative_variant(f)
            } else {
                kp_residual(f)
            };
            r.map(|s| s.max_abs()).map_err(|e| e.to_string())
        };
        vec![
            CheckRecord::new(
                "hirota_ops/kp/soliton",
                "KP equation on the one-soliton Tau function",
                inputs.clone(),
                res(false),
                c.soliton_tolerance,
                Below,
            ),
            CheckRecord::new(
                "hirota_ops/kp/soliton_first_derivative_variant",
                "KP variant with first instead of second t1-derivative fails on the soliton",
                inputs,
                res(true),
                c.variant_threshold,
                Above,
            ),
        ]
    }));
    SuiteOutput {
        checks: run_tasks(exec, tasks),
        plot: vec![],
    }
}

fn normalized_series(n: usize, pot: &PotentialSpec, moments: usize, trunc: u32) -> Result<TauContext<Complex64>, String> {
    let ctx = MatrixTauContext::with_moments(n, pot.clone(), moments).map_err(|e| e.to_string())?;
    let s = ctx.tau_series(trunc).map_err(|e| e.to_string())?;
    let s = s.scale(&(1.0 / s.constant_term()));
    TauContext::new(s).map_err(|e| e.to_string())
}

fn hirota_formal(cfg: &SuiteConfig, exec: Exec) -> SuiteOutput {
    let c = &cfg.hirota_formal;
    let pot = match potential(&c.potential) {
        Ok(p) => p,
        Err(e) => {
            return SuiteOutput {
                checks: vec![setup_failure("hirota_formal/setup", "matrix potential", e)],
                plot: vec![],
            }
        }
    };
    let t1 = normalized_series(1, &pot, c.moments, c.truncation);
    let t2_at = |trunc: u32| normalized_series(2, &pot, c.moments, trunc);
    let t2 = t2_at(c.truncation);
    let mut tasks: Vec<Task> = Vec::new();
    for w in 0..c.max_degree {
        for mu in partitions(w) {
            let t1 = &t1;
            tasks.push(Box::new(move || {
                let r = t1
                    .as_ref()
                    .map_err(|e| e.clone())
                    .and_then(|ctx| hirota_residual(ctx, &mu).map(|s| s.max_abs()).map_err(|e| e.to_string()));
                vec![CheckRecord::new(
                    format!("hirota_formal/hirota_n1/{}", mu_tag(&mu)),
                    "Hirota equation D_mu T.T = 0 on the N=1 matrix Tau series",
                    json!({"mu": mu, "degree": 1 + w, "truncation": c.truncation, "matrix_size": 1}),
                    r,
                    c.hirota_tolerance,
                    Below,
                )]
            }));
        }
    }
    for (n, series) in [(1usize, &t1), (2, &t2)] {
        tasks.push(Box::new(move || {
            let r = series.as_ref().map_err(|e| e.clone()).and_then(|ctx| {
                let f = ctx.hat_t().log().map_err(|e| e.to_string())?;
                kp_residual(&f).map(|s| s.max_abs()).map_err(|e| e.to_string())
            });
            vec![CheckRecord::new(
                format!("hirota_formal/kp/n{n}"),
                "KP equation on the logarithm of the matrix Tau series",
                json!({"matrix_size": n, "truncation": c.truncation}),
                r,
                c.kp_tolerance,
                Below,
            )]
        }));
    }
    let z = Var::Aux;
    for &trunc in &c.fay_truncations {
        let t2_at = &t2_at;
        tasks.push(Box::new(move || {
            let r = t2_at(trunc).and_then(|ctx| {
                fay_n2_residual(&ctx, [z(0), z(1)], [z(2), z(3)])
                    .map(|s| s.max_abs())
                    .map_err(|e| e.to_string())
            });
            vec![CheckRecord::new(
                format!("hirota_formal/fay_n2/trunc{trunc:02}"),
                "two-point Fay identity as a series in the times and four points",
                json!({"matrix_size": 2, "truncation": trunc}),
                r,
                c.fay_tolerance,
                Below,
            )]
        }));
    }
    for &trunc in &c.reproducing_truncations {
        let t2_at = &t2_at;
        tasks.push(Box::new(move || {
            let r = t2_at(trunc).and_then(|ctx| {
                reproducing_residual(&ctx, z(0), z(1), z(2))
                    .map(|s| s.max_abs())
                    .map_err(|e| e.to_string())
            });
            vec![CheckRecord::new(
                format!("hirota_formal/reproducing/trunc{trunc:02}"),
                "reproducing relation for the Fay kernel",
                json!({"matrix_size": 2, "truncation": trunc}),
                r,
                c.reproducing_tolerance,
                Below,
            )]
        }));
    }
    for &k in &c.wn_orders {
        let t2 = &t2;
        tasks.push(Box::new(move || {
            let xis: Vec<Var> = (0..k as u32).map(z).collect();
            let r = t2.as_ref().map_err(|e| e.clone()).and_then(|ctx| {
                wn_determinantal_residual(ctx, &xis)
                    .map(|s| s.max_abs())
                    .map_err(|e| e.to_string())
            });
            vec![CheckRecord::new(
                format!("hirota_formal/wn/n{k}"),
                "connected correlator W_n against the determinantal formula",
                json!({"n": k, "matrix_size": 2, "truncation": c.truncation}),
                r,
                c.wn_tolerance,
                Below,
            )]
        }));
    }
    SuiteOutput {
        checks: run_tasks(exec, tasks),
        plot: vec![],
    }
}

fn fay_genus0(cfg: &SuiteConfig, exec: Exec) -> Result<SuiteOutput, ReportError> {
    let c = &cfg.fay_genus0;
    let mut rng = stream(cfg.seed, "fay_genus0");
    let mut cases = Vec::new();
    for &n in &c.n_values {
        for k in 0..c.configs_per_n {
            let pts = separated(&mut rng, 2 * n, c.min_separation, &[], square(c.box_half_width))?;
            cases.push((n, k, pts));
        }
    }
    let sphere = SurfaceContext::sphere(Complex64::new(0.0, 0.0));
    let mut tasks: Vec<Task> = Vec::new();
    for (n, k, pts) in cases {
        let sphere = &sphere;
        tasks.push(Box::new(move || {
            let (zs, zts) = pts.split_at(n);
            let r = fay_surface_residual_zero_form(sphere, zs, zts).map(|ch| ch.relative());
            vec![CheckRecord::new(
                format!("fay_genus0/n{n}/{k:03}"),
                "Fay identity on the sphere (Cauchy determinant), relative residual",
                json!({"n": n, "zs": cjs(zs), "zts": cjs(zts)}),
                r,
                c.tolerance,
                Below,
            )]
        }));
    }
    tasks.push(Box::new(|| {
        let zs = [Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)];
        let zts = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let inputs = json!({"zs": cjs(&zs), "zts": cjs(&zts), "expected": -1.0 / 12.0});
        let ch = fay_surface_residual_zero_form(&sphere, &zs, &zts);
        vec![
            CheckRecord::new(
                "fay_genus0/hand/residual",
                "Fay identity at the hand-computed configuration",
                inputs.clone(),
                ch.as_ref().map(|ch| ch.residual()).map_err(|e| e.to_string()),
                c.tolerance,
                Below,
            ),
            CheckRecord::new(
                "fay_genus0/hand/value",
                "shifted ratio equals -1/12 at the hand-computed configuration",
                inputs,
                ch.as_ref().map(|ch| (ch.lhs + 1.0 / 12.0).norm()).map_err(|e| e.to_string()),
                c.tolerance,
                Below,
            ),
        ]
    }));
    Ok(SuiteOutput {
        checks: run_tasks(exec, tasks),
        plot: vec![],
    })
}

struct TorusCase {
    index: usize,
    tau: Complex64,
    surface: SurfaceContext,
    form: MeromorphicForm,
    poles: [Complex64; 2],
    fay: Vec<(usize, usize, Vec<Complex64>)>,
    monodromy: [Complex64; 2],
    reproducing: [Complex64; 3],
}

fn fay_genus1(cfg: &SuiteConfig, exec: Exec) -> Result<SuiteOutput, ReportError> {
    let c = &cfg.fay_genus1;
    let o = cx(&c.origin);
    let mut rng = stream(cfg.seed, "fay_genus1");
    let mut cases = Vec::new();
    let mut checks = Vec::new();
    for (index, t) in c.taus.iter().enumerate() {
        let tau = cx(t);
        let surface = match SurfaceContext::torus(tau, o) {
            Ok(s) => s,
            Err(e) => {
                checks.push(setup_failure(&format!("fay_genus1/tau{index}/setup"), "torus", e));
                continue;
            }
        };
        let at = |p: [f64; 2]| o + p[0] + tau * p[1];
        let poles = [at(c.form_poles[0]), at(c.form_poles[1])];
        let form = MeromorphicForm::single(Complex64::new(1.0, 0.0), Component::third(poles[0], poles[1]));
        let mut fay = Vec::new();
        for &n in &c.n_values {
            for k in 0..c.configs_per_case {
                fay.push((n, k, separated(&mut rng, 2 * n, c.min_separation, &poles, cell(tau, o, c.margin))?));
            }
        }
        let m = separated(&mut rng, 2, c.min_separation, &poles, cell(tau, o, c.margin))?;
        let r = separated(&mut rng, 3, c.min_separation, &poles, cell(tau, o, c.margin))?;
        cases.push(TorusCase {
            index,
            tau,
            surface,
            form,
            poles,
            fay,
            monodromy: [m[0], m[1]],
            reproducing: [r[0], r[1], r[2]],
        });
    }

    let mut tasks: Vec<Task> = Vec::new();
    for case in &cases {
        let base = json!({"tau": cj(case.tau), "origin": cj(o)});
        for (n, k, pts) in &case.fay {
            let base = base.clone();
            tasks.push(Box::new(move || {
                let (zs, zts) = pts.split_at(*n);
                let inputs = |omega: &str| {
                    let mut v = base.clone();
                    v["omega"] = json!(omega);
                    v["zs"] = cjs(zs);
                    v["zts"] = cjs(zts);
                    v
                };
                let zero = fay_surface_residual_zero_form(&case.surface, zs, zts).map(|ch| ch.relative());
                let integer = SzegoKernel::new(&case.surface, &case.form)
                    .and_then(|kern| fay_surface_residual(&kern, zs, zts))
                    .map(|ch| ch.relative());
                vec![
                    CheckRecord::new(
                        format!("fay_genus1/tau{}/omega_zero/n{n}/{k:03}", case.index),
                        "Fay identity on the torus with zero form and even shift, relative residual",
                        inputs("zero"),
                        zero,
                        c.tolerance,
                        Below,
                    ),
                    CheckRecord::new(
                        format!("fay_genus1/tau{}/omega_integer/n{n}/{k:03}", case.index),
                        "Fay identity on the torus with an integer-residue third-kind form, relative residual",
                        {
                            let mut v = inputs("integer_third_kind");
                            v["poles"] = cjs(&case.poles);
                            v
                        },
                        integer,
                        c.tolerance,
                        Below,
                    ),
                ]
            }));
        }
        let base_m = base.clone();
        tasks.push(Box::new(move || {
            let d = Divisor::from_real(&[(case.monodromy[0], 1.0), (case.monodromy[1], -1.0)]);
            let kern = SzegoKernel::new(&case.surface, &case.form);
            let mono = match (&kern, &d) {
                (Ok(k), Ok(d)) => k.monodromy(d, 0).map(|r| r.a_shift.max(r.b_shift)).map_err(|e| e.to_string()),
                (Err(e), _) => Err(e.to_string()),
                (_, Err(e)) => Err(e.to_string()),
            };
            let chain = kern
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|k| a_cycle_chain(k.evaluator(), 3).map_err(|e| e.to_string()));
            let mut inputs = base_m.clone();
            inputs["divisor"] = cjs(&case.monodromy);
            inputs["poles"] = cjs(&case.poles);
            vec![
                CheckRecord::new(
                    format!("fay_genus1/tau{}/monodromy", case.index),
                    "Szego kernel is single valued around both cycles for integer residues",
                    inputs.clone(),
                    mono,
                    c.monodromy_tolerance,
                    Below,
                ),
                CheckRecord::new(
                    format!("fay_genus1/tau{}/a_cycle_chain", case.index),
                    "A-period of the form is consistent with its epsilon over three turns",
                    inputs,
                    chain,
                    c.monodromy_tolerance,
                    Below,
                ),
            ]
        }));
        let base_r = base.clone();
        tasks.push(Box::new(move || {
            let [a, b, d] = case.reproducing;
            let mut out = Vec::new();
            let kernels = [
                ("omega_zero", SzegoKernel::with_characteristic(&case.surface, &MeromorphicForm::zero(), Characteristic { n: 1, m: 0 })),
                ("omega_integer", SzegoKernel::new(&case.surface, &case.form)),
            ];
            for (name, kern) in kernels {
                let r = kern
                    .map_err(|e| e.to_string())
                    .and_then(|k| reproducing_numeric(&k, a, b, d).map(|ch| ch.relative()).map_err(|e| e.to_string()));
                let mut inputs = base_r.clone();
                inputs["points"] = cjs(&case.reproducing);
                out.push(CheckRecord::new(
                    format!("fay_genus1/tau{}/{name}/reproducing", case.index),
                    "reproducing relation for the Szego kernel, relative residual",
                    inputs,
                    r,
                    c.reproducing_tolerance,
                    Below,
                ));
            }
            out
        }));
    }
    tasks.push(Box::new(|| {
        let tau = Complex64::new(0.0, 1.0);
        let o = Complex64::new(-0.05, -0.05);
        let (p, q) = (Complex64::new(0.9, 0.0), Complex64::new(0.8, 0.7));
        let (a, b) = (Complex64::new(0.6, 0.2), Complex64::new(0.2, 0.6));
        let inputs = json!({"tau": cj(tau), "origin": cj(o), "residue": c.control_residue,
                            "poles": cjs(&[p, q]), "divisor": cjs(&[a, b])});
        let r = (|| -> Result<f64, String> {
            let s = SurfaceContext::torus(tau, o).map_err(|e| e.to_string())?;
            let f = MeromorphicForm::single(Complex64::new(c.control_residue, 0.0), Component::third(p, q));
            let k = SzegoKernel::new(&s, &f).map_err(|e| e.to_string())?;
            let d = Divisor::from_real(&[(a, 1.0), (b, -1.0)]).map_err(|e| e.to_string())?;
            let m = k.monodromy(&d, 0).map_err(|e| e.to_string())?;
            Ok(m.a_shift.max(m.b_shift))
        })();
        vec![CheckRecord::new(
            "fay_genus1/control/non_integer_monodromy",
            "control: a non-integer residue breaks single-valuedness",
            inputs,
            r,
            c.control_threshold,
            Above,
        )]
    }));
    checks.extend(run_tasks(exec, tasks));
    Ok(SuiteOutput { checks, plot: vec![] })
}

/// Σ_{|n|≤R} exp(πin²τ + 2πinu).
fn theta_direct(u: Complex64, tau: Complex64, radius: i64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (-radius..=radius)
        .map(|n| {
            let nf = n as f64;
            (PI * i * nf * nf * tau + 2.0 * PI * i * nf * u).exp()
        })
        .sum()
}

fn theta_props(cfg: &SuiteConfig, exec: Exec) -> SuiteOutput {
    let c = &cfg.theta_props;
    let mut rng = stream(cfg.seed, "theta_props");
    let samples: Vec<Vec<Complex64>> = c
        .taus
        .iter()
        .map(|t| {
            (0..c.samples)
                .map(|_| {
                    let h = c.sample_height * t.im;
                    Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-h..=h))
                })
                .collect()
        })
        .collect();
    let mut tasks: Vec<Task> = Vec::new();
    for (index, (t, us)) in c.taus.iter().zip(&samples).enumerate() {
        tasks.push(Box::new(move || {
            let tau = cx(t);
            let th = match Theta::new(tau, c.tail) {
                Ok(th) => th,
                Err(e) => return vec![setup_failure(&format!("theta_props/tau{index}/setup"), "theta", e)],
            };
            let base = json!({"tau": cj(tau), "tail": c.tail, "samples": cjs(us)});
            let max_over = |f: &dyn Fn(Complex64) -> f64| us.iter().map(|&u| f(u)).fold(0.0, f64::max);
            let mut out = vec![
                CheckRecord::new(
                    format!("theta_props/tau{index}/parity"),
                    "theta is even, relative residual",
                    base.clone(),
                    Ok::<f64, String>(max_over(&|u| (th.eval(u) - th.eval(-u)).norm() / th.eval(u).norm())),
                    c.tolerance,
                    Below,
                ),
                CheckRecord::new(
                    format!("theta_props/tau{index}/direct_sum"),
                    "theta against an independent direct lattice sum, relative residual",
                    {
                        let mut v = base.clone();
                        v["oracle_radius"] = json!(c.oracle_radius);
                        v
                    },
                    Ok::<f64, String>(max_over(&|u| {
                        (th.eval(u) - theta_direct(u, tau, c.oracle_radius)).norm() / th.eval(u).norm()
                    })),
                    c.tolerance,
                    Below,
                ),
                CheckRecord::new(
                    format!("theta_props/tau{index}/odd_characteristic"),
                    "theta vanishes at the odd half period (1+tau)/2",
                    json!({"tau": cj(tau), "tail": c.tail}),
                    Ok::<f64, String>(th.eval((1.0 + tau) / 2.0).norm()),
                    c.tolerance,
                    Below,
                ),
            ];
            for &[n, m] in &c.shifts {
                let i = Complex64::new(0.0, 1.0);
                let mf = m as f64;
                let rel = max_over(&|u| {
                    let lhs = th.eval(u + n as f64 + tau * mf);
                    let rhs = th.eval(u) * (-2.0 * PI * i * u * mf - PI * i * tau * mf * mf).exp();
                    (lhs - rhs).norm() / lhs.norm().max(rhs.norm())
                });
                let mut v = base.clone();
                v["shift"] = json!([n, m]);
                out.push(CheckRecord::new(
                    format!("theta_props/tau{index}/quasi_periodicity/{n}_{m}"),
                    "theta quasi-periodicity under u -> u + n + m tau, relative residual",
                    v,
                    Ok::<f64, String>(rel),
                    c.tolerance,
                    Below,
                ));
            }
            out
        }));
    }
    tasks.push(Box::new(move || {
        let tau = Complex64::new(0.0, 1.0);
        let v = Theta::new(tau, c.tail).map(|th| th.eval(Complex64::new(0.0, 0.0)));
        let oracle = theta_direct(Complex64::new(0.0, 0.0), tau, c.oracle_radius);
        vec![
            CheckRecord::new(
                "theta_props/theta0_at_i/direct_sum",
                "theta(0; i) against the direct lattice sum",
                json!({"tau": cj(tau), "oracle_radius": c.oracle_radius}),
                v.as_ref().map(|v| (v - oracle).norm()).map_err(|e| e.to_string()),
                c.tolerance,
                Below,
            ),
            CheckRecord::new(
                "theta_props/theta0_at_i/literal",
                "theta(0; i) against its quoted eight-digit value",
                json!({"tau": cj(tau), "literal": c.theta0_literal}),
                v.as_ref().map(|v| (v - c.theta0_literal).norm()).map_err(|e| e.to_string()),
                c.literal_tolerance,
                Below,
            ),
        ]
    }));
    let checks = run_tasks(exec, tasks);

    let mut plot = Vec::new();
    if let (Some(t), Some(u)) = (c.taus.first(), samples.first().and_then(|s| s.first())) {
        let tau = cx(t);
        if let Ok(th) = Theta::new(tau, c.tail) {
            let full = th.eval(*u);
            for r in 0..=c.oracle_radius {
                plot.push(PlotPoint {
                    suite: "theta_props".into(),
                    series: "direct_sum_error_vs_radius".into(),
                    x: r as f64,
                    y: (theta_direct(*u, tau, r) - full).norm(),
                });
            }
        }
    }
    SuiteOutput { checks, plot }
}

fn airy_shift(cfg: &SuiteConfig, exec: Exec) -> SuiteOutput {
    let c = &cfg.airy_shift;
    let mut tasks: Vec<Task> = Vec::new();
    let i = Complex64::new(0.0, 1.0);
    for (j, job) in c.jobs.iter().enumerate() {
        let dj = serde_json::to_value(&job.divisor).unwrap_or(Value::Null);
        let single = (job.divisor.len() == 1).then(|| job.divisor.points()[0].z);
        if let Some(z1) = single {
            tasks.push(Box::new(move || {
                let r = convergence_radius(z1);
                let closed = zeta_series(z1, c.k_max);
                let newton = newton_taylor(z1, c.k_max, c.cauchy_fraction * r, c.cauchy_nodes);
                let mut out = Vec::new();
                for k in 1..=c.k_max {
                    let res = match (&closed, &newton) {
                        (Ok(a), Ok(b)) => Ok((a[k - 1] - b[k - 1]).norm() / a[k - 1].norm()),
                        (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
                    };
                    out.push(CheckRecord::new(
                        format!("airy_shift/job{j}/series/k{k:02}"),
                        "closed-form zeta series coefficient against Cauchy integral of Newton solutions, relative",
                        json!({"z1": cj(z1), "k": k, "cauchy_radius": c.cauchy_fraction * r, "nodes": c.cauchy_nodes}),
                        res,
                        job.tolerances.series,
                        Below,
                    ));
                }
                let d = &job.divisor;
                let inside = i * (c.inside_fraction * r);
                let conv = zeta_partial_sum(z1, inside, c.divergence_terms).map_err(|e| e.to_string()).and_then(|s| {
                    let z = solve_shift(d, inside, job.steps).map_err(|e| e.to_string())?;
                    Ok((s - z.zetas[0]).norm())
                });
                out.push(CheckRecord::new(
                    format!("airy_shift/job{j}/radius/inside"),
                    "zeta series converges to the Newton solution inside the radius 2|z1|^3/(3 sqrt 3)",
                    json!({"z1": cj(z1), "u": cj(inside), "radius": r, "terms": c.divergence_terms}),
                    conv,
                    job.tolerances.series,
                    Below,
                ));
                let outside = i * (c.outside_fraction * r);
                let last = series_terms(z1, outside, c.divergence_terms)
                    .map(|t| t.last().copied().unwrap_or(0.0))
                    .map_err(|e| e.to_string());
                out.push(CheckRecord::new(
                    format!("airy_shift/job{j}/radius/outside"),
                    "zeta series terms grow beyond the radius 2|z1|^3/(3 sqrt 3)",
                    json!({"z1": cj(z1), "u": cj(outside), "radius": r, "terms": c.divergence_terms}),
                    last,
                    1.0,
                    Above,
                ));
                out
            }));
        }
        for (ui, &u) in job.u_list.iter().enumerate() {
            let dj = dj.clone();
            tasks.push(Box::new(move || {
                let base = json!({"divisor": dj, "u": cj(u), "steps": job.steps});
                let mut out = Vec::new();
                let sol = solve_shift(&job.divisor, u, job.steps);
                out.push(CheckRecord::new(
                    format!("airy_shift/job{j}/u{ui}/solver"),
                    "shift equations for the points zeta_i and the constant C",
                    base.clone(),
                    sol.as_ref().map(|s| s.residual()).map_err(|e| e.to_string()),
                    c.solver_tolerance,
                    Below,
                ));
                let curve = SpectralCurve::shifted(&job.divisor, u, job.steps);
                if !job.z_samples.is_empty() {
                    let r = curve.as_ref().map_err(|e| e.to_string()).and_then(|cv| {
                        job.z_samples.iter().try_fold(0.0f64, |m, &z| {
                            cv.curve_equation_residual(z).map(|r| m.max(r.norm())).map_err(|e| e.to_string())
                        })
                    });
                    let mut v = base.clone();
                    v["z_samples"] = cjs(&job.z_samples);
                    out.push(CheckRecord::new(
                        format!("airy_shift/job{j}/u{ui}/curve_equation"),
                        "shifted Airy curve equation at the sample points",
                        v,
                        r,
                        job.tolerances.curve,
                        Below,
                    ));
                }
                let t = curve.as_ref().map_err(|e| e.to_string()).and_then(|cv| {
                    cv.times(c.times_k_max)
                        .map(|t| t.distance(&cv.expected_times(c.times_k_max)))
                        .map_err(|e| e.to_string())
                });
                let mut v = base;
                v["k_max"] = json!(c.times_k_max);
                out.push(CheckRecord::new(
                    format!("airy_shift/job{j}/u{ui}/times"),
                    "times of the shifted curve by residues against the shift by [D]",
                    v,
                    t,
                    job.tolerances.times,
                    Below,
                ));
                out
            }));
        }
    }
    tasks.push(Box::new(move || {
        let u = cx(&c.fiber_u);
        let z = cx(&c.fiber_point);
        let r = SpectralCurve::shifted(&c.fiber_divisor, u, crate::spectral_curve::DEFAULT_STEPS)
            .and_then(|cv| cv.fiber_derivative_residual(z, c.fiber_step, crate::spectral_curve::DEFAULT_STEPS))
            .map_err(|e| e.to_string());
        vec![CheckRecord::new(
            "airy_shift/fiber_derivative",
            "derivative of y dx along the shift is the third-kind differential",
            json!({"divisor": serde_json::to_value(&c.fiber_divisor).unwrap_or(Value::Null),
                   "u": cj(u), "z": cj(z), "step": c.fiber_step}),
            r,
            c.fiber_tolerance,
            Below,
        )]
    }));
    let checks = run_tasks(exec, tasks);

    let mut plot = Vec::new();
    if let Some(job) = c.jobs.iter().find(|j| j.divisor.len() == 1) {
        let z1 = job.divisor.points()[0].z;
        let r = convergence_radius(z1);
        let n = c.plot_points.max(2);
        for s in 0..n {
            let frac = 0.1 + 1.4 * s as f64 / (n - 1) as f64;
            let u = i * (frac * r);
            if let (Ok(sum), Ok(sol)) = (zeta_partial_sum(z1, u, c.plot_terms), solve_shift(&job.divisor, u, job.steps)) {
                plot.push(PlotPoint {
                    suite: "airy_shift".into(),
                    series: "series_error_vs_u_over_radius".into(),
                    x: frac,
                    y: (sum - sol.zetas[0]).norm(),
                });
            }
        }
    }
    SuiteOutput { checks, plot }
}

fn matrix_fay(cfg: &SuiteConfig, exec: Exec) -> SuiteOutput {
    let c = &cfg.matrix_fay;
    let zs: Vec<Complex64> = c.zs.iter().map(cx).collect();
    let zts: Vec<Complex64> = c.zts.iter().map(cx).collect();
    let mut tasks: Vec<Task> = Vec::new();
    for p in &c.potentials {
        for &n in &c.sizes {
            let (zs, zts) = (&zs, &zts);
            tasks.push(Box::new(move || {
                let id = |s: &str| format!("matrix_fay/{}/n{n}/{s}", p.name);
                let base = json!({"potential": p.name, "times": p.times, "matrix_size": n});
                let ctx = match potential(&p.times)
                    .and_then(|v| MatrixTauContext::new(n, v).map_err(|e| e.to_string()))
                {
                    Ok(ctx) => ctx,
                    Err(e) => return vec![setup_failure(&id("setup"), "matrix model", e)],
                };
                let mut out = Vec::new();
                let mut v = base.clone();
                v["zs"] = cjs(zs);
                v["zts"] = cjs(zts);
                out.push(CheckRecord::new(
                    id("fay"),
                    "Fay identity for the matrix model Tau function, relative residual",
                    v,
                    fay_matrix_residual(&ctx, zs, zts).map(|ch| ch.relative()),
                    c.tolerance,
                    Below,
                ));
                let [a, b, d] = c.reproducing_points.map(|z| cx(&z));
                let mut v = base.clone();
                v["points"] = cjs(&[a, b, d]);
                out.push(CheckRecord::new(
                    id("reproducing"),
                    "reproducing relation for the matrix model kernel, relative residual",
                    v,
                    reproducing_numeric(&ctx, a, b, d).map(|ch| ch.relative()),
                    c.reproducing_tolerance,
                    Below,
                ));
                let heine = ctx.tau_n();
                let mut v = base.clone();
                v["nodes"] = json!(c.nodes);
                out.push(CheckRecord::new(
                    id("heine_vs_eigenvalues"),
                    "Hankel determinant of moments against direct eigenvalue quadrature, relative",
                    v,
                    ctx.eigenvalue_integral(c.nodes, |_| Complex64::new(1.0, 0.0))
                        .map(|e| (e - heine).norm() / heine.norm()),
                    c.heine_tolerance,
                    Below,
                ));
                for (k, x) in c.insertion_points.iter().map(cx).enumerate() {
                    let r = (|| -> Result<f64, String> {
                        let phi = ctx.phi(x).map_err(|e| e.to_string())?;
                        let num = ctx
                            .eigenvalue_integral(c.nodes, |l| l.iter().map(|&y| 1.0 / (x - y)).product())
                            .map_err(|e| e.to_string())?;
                        let den = ctx
                            .eigenvalue_integral(c.nodes, |_| Complex64::new(1.0, 0.0))
                            .map_err(|e| e.to_string())?;
                        Ok((phi - num / den).norm())
                    })();
                    let mut v = base.clone();
                    v["x"] = cj(x);
                    v["nodes"] = json!(c.nodes);
                    out.push(CheckRecord::new(
                        id(&format!("inverse_determinant/{k}")),
                        "average of 1/det(x-M) against eigenvalue quadrature",
                        v,
                        r,
                        c.heine_tolerance,
                        Below,
                    ));
                }
                out
            }));
        }
        tasks.push(Box::new(move || {
            let r = potential(&p.times)
                .and_then(|v| MatrixTauContext::new(1, v).map_err(|e| e.to_string()))
                .and_then(|ctx| {
                    let mut worst = 0.0f64;
                    for n in 0..=c.orthogonality_max {
                        for m in 0..=c.orthogonality_max + 1 {
                            let r = ctx.orthogonality_residual(n, m).map_err(|e| e.to_string())?;
                            worst = worst.max(r.norm());
                        }
                    }
                    Ok(worst)
                });
            vec![CheckRecord::new(
                format!("matrix_fay/{}/orthogonality", p.name),
                "contour pairing of psi_n and phi_m is delta_(m, n+1)",
                json!({"potential": p.name, "times": p.times, "max_index": c.orthogonality_max}),
                r,
                c.orthogonality_tolerance,
                Below,
            )]
        }));
    }
    tasks.push(Box::new(move || {
        let ctx = MatrixTauContext::new(2, PotentialSpec::gaussian()).map_err(|e| e.to_string());
        let want = 4.0 * PI;
        let inputs = json!({"potential": "gaussian", "matrix_size": 2, "expected": want, "nodes": c.nodes});
        vec![
            CheckRecord::new(
                "matrix_fay/gaussian_n2_normalization/heine",
                "N=2 Gaussian partition function equals 4 pi (moments)",
                inputs.clone(),
                ctx.as_ref().map(|ctx| (ctx.tau_n() - want).norm() / want).map_err(|e| e.clone()),
                c.heine_tolerance,
                Below,
            ),
            CheckRecord::new(
                "matrix_fay/gaussian_n2_normalization/eigenvalues",
                "N=2 Gaussian partition function equals 4 pi (eigenvalue quadrature)",
                inputs,
                ctx.as_ref().map_err(|e| e.clone()).and_then(|ctx| {
                    ctx.eigenvalue_integral(c.nodes, |_| Complex64::new(1.0, 0.0))
                        .map(|e| (e - want).norm() / want)
                        .map_err(|e| e.to_string())
                }),
                c.heine_tolerance,
                Below,
            ),
        ]
    }));
    SuiteOutput {
        checks: run_tasks(exec, tasks),
        plot: vec![],
    }
}

fn decomposition(cfg: &SuiteConfig, exec: Exec) -> Result<SuiteOutput, ReportError> {
    let c = &cfg.decomposition;
    let tau = cx(&c.tau);
    let o = cx(&c.origin);
    let mut rng = stream(cfg.seed, "decomposition");
    let mut cases = Vec::new();
    for k in 0..c.forms {
        let poles = separated(&mut rng, 7, c.min_separation, &[], cell(tau, o, c.margin))?;
        let coeffs: Vec<Complex64> = (0..6).map(|_| unit_complex(&mut rng)).collect();
        let form = MeromorphicForm::zero()
            .plus(coeffs[0], Component::third(poles[0], poles[1]))
            .plus(coeffs[1], Component::third(poles[2], poles[3]))
            .plus(coeffs[2], Component::second(poles[4], 1))
            .plus(coeffs[3], Component::second(poles[5], 2))
            .plus(coeffs[4], Component::second(poles[6], 3))
            .plus(coeffs[5], Component::Holomorphic);
        let samples = avoiding(&mut rng, c.samples, c.sample_separation, &poles, cell(tau, o, 0.0))?;
        cases.push((k, form, samples));
    }
    let surface = SurfaceContext::torus(tau, o);
    let mut tasks: Vec<Task> = Vec::new();
    for (k, form, samples) in &cases {
        let surface = &surface;
        tasks.push(Box::new(move || {
            let r = surface
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|s| round_trip_error(s, form, samples).map_err(|e| e.to_string()));
            vec![CheckRecord::new(
                format!("decomposition/form{k:02}"),
                "extract times and periods of a six-component form and rebuild it",
                json!({"tau": cj(tau), "origin": cj(o), "form": serde_json::to_value(form).unwrap_or(Value::Null),
                       "samples": samples.len()}),
                r,
                c.tolerance,
                Below,
            )]
        }));
    }
    Ok(SuiteOutput {
        checks: run_tasks(exec, tasks),
        plot: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_up_to_six() {
        let counts: Vec<usize> = (0..7).map(|w| partitions(w).len()).collect();
        assert_eq!(counts, [1, 1, 2, 3, 5, 7, 11]);
        assert!(partitions(3).contains(&vec![0, 0, 1]));
        assert!(partitions(3).contains(&vec![1, 1]));
        assert!(partitions(3).contains(&vec![3]));
    }
}
