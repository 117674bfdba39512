//! Acceptance run over the full benchmark grid at eta = 2200.
//!
//! Prints one PASS/FAIL line per criterion and exits non-zero if any fails.
//!
//! A handful of published cells cannot be reproduced from the published
//! inputs. Each is listed in `ERRATA` with the computation that does
//! reproduce it, and that computation is carried out and checked here. A
//! cell only passes through an erratum when the erratum's own values match
//! the published ones within the criterion's tolerance.

use std::process::ExitCode;

use convorder::driver::{self, adaptive_digits, should_stop, EstimatorMode, PrecisionPolicy};
use convorder::estimators;
use convorder::harness::grid::cross_mode_agreement;
use convorder::harness::synthetic::{default_models, parse_rho};
use convorder::harness::{run_grid, verify_propositions, GridConfig, GridReport};
use convorder::methods::MethodId::{self, *};
use convorder::precision::{self, digits_to_bits};
use convorder::problems::{
    self, cached_reference_root,
    ProblemId::{self, *},
};
use rug::ops::Pow;
use rug::Float;

const ETA: u32 = 2200;
const TOL: f64 = 0.10;

/// Published per-cell results: `I` and Δλ in the order bar, hat, tilde, breve.
#[rustfmt::skip]
const PUBLISHED: [(MethodId, ProblemId, usize, [f64; 4]); 42] = [
    (Phi1, F1, 12, [1.803e-4, 3.607e-4, 2.404e-4, 1.086e-3]),
    (Phi1, F2, 11, [2.790e-5, 5.580e-5, 3.720e-5, 8.504e-4]),
    (Phi1, F3, 10, [7.143e-4, 1.430e-3, 9.526e-4, 1.220e-3]),
    (Phi1, F4, 11, [2.723e-4, 5.448e-4, 3.632e-4, 6.446e-4]),
    (Phi1, F5, 12, [1.109e-3, 2.215e-3, 1.478e-3, 4.018e-4]),
    (Phi1, F6, 10, [1.040e-3, 2.082e-3, 1.387e-3, 1.121e-3]),
    (Phi1, F7, 11, [1.512e-4, 3.025e-4, 2.016e-4, 6.032e-5]),
    (Phi2, F1, 8, [2.077e-4, 6.233e-4, 3.739e-4, 3.048e-3]),
    (Phi2, F2, 7, [7.185e-4, 2.154e-3, 1.293e-3, 2.148e-3]),
    (Phi2, F3, 6, [1.949e-3, 5.858e-3, 3.511e-3, 4.527e-3]),
    (Phi2, F4, 7, [8.917e-5, 1.437e-4, 1.033e-4, 2.109e-4]),
    (Phi2, F5, 8, [3.318e-3, 9.921e-3, 5.965e-3, 8.876e-4]),
    (Phi2, F6, 6, [3.107e-3, 9.350e-3, 5.600e-3, 3.612e-3]),
    (Phi2, F7, 7, [2.017e-4, 6.051e-4, 3.630e-4, 4.643e-4]),
    (Phi3, F1, 6, [8.809e-6, 3.524e-5, 2.014e-5, 1.218e-2]),
    (Phi3, F2, 6, [1.261e-3, 5.039e-3, 2.881e-3, 2.091e-3]),
    (Phi3, F3, 5, [2.142e-3, 8.585e-3, 4.900e-3, 6.033e-3]),
    (Phi3, F4, 6, [2.635e-4, 1.054e-3, 6.024e-4, 1.567e-3]),
    (Phi3, F5, 6, [1.299e-2, 5.129e-2, 2.952e-2, 2.814e-3]),
    (Phi3, F6, 5, [3.778e-3, 1.517e-2, 8.650e-3, 4.521e-3]),
    (Phi3, F7, 5, [6.252e-5, 2.501e-4, 1.429e-4, 3.027e-3]),
    (Phi4, F1, 17, [9.045e-5, 1.466e-4, 1.064e-4, 5.448e-4]),
    (Phi4, F2, 18, [8.112e-6, 1.159e-5, 7.925e-6, 2.223e-4]),
    (Phi4, F3, 16, [3.777e-4, 6.100e-4, 4.396e-4, 6.448e-4]),
    (Phi4, F4, 16, [1.090e-4, 1.788e-4, 1.321e-4, 2.588e-4]),
    (Phi4, F5, 18, [5.817e-4, 9.408e-4, 6.811e-4, 2.107e-4]),
    (Phi4, F6, 14, [5.110e-4, 8.333e-4, 6.098e-4, 5.510e-3]),
    (Phi4, F7, 15, [8.050e-5, 1.295e-4, 9.285e-5, 3.187e-5]),
    (Phi5, F1, 9, [3.573e-4, 8.632e-4, 5.448e-4, 2.152e-3]),
    (Phi5, F2, 9, [5.517e-5, 1.419e-4, 1.026e-4, 1.715e-3]),
    (Phi5, F3, 9, [8.826e-4, 2.135e-3, 1.349e-3, 1.507e-3]),
    (Phi5, F4, 8, [5.266e-4, 1.271e-4, 7.997e-4, 1.247e-3]),
    (Phi5, F5, 10, [1.536e-3, 3.702e-3, 2.337e-3, 5.563e-4]),
    (Phi5, F6, 7, [3.033e-3, 7.230e-3, 4.375e-3, 3.269e-3]),
    (Phi5, F7, 8, [4.718e-4, 1.136e-3, 7.120e-4, 1.876e-4]),
    (Phi6, F1, 8, [4.641e-4, 1.173e-3, 6.377e-4, 2.721e-3]),
    (Phi6, F2, 8, [3.614e-5, 1.570e-4, 1.448e-4, 1.385e-3]),
    (Phi6, F3, 7, [2.626e-3, 7.252e-3, 4.481e-3, 4.493e-3]),
    (Phi6, F4, 7, [7.782e-4, 1.477e-3, 3.595e-4, 1.705e-3]),
    (Phi6, F5, 8, [3.405e-3, 8.740e-3, 4.913e-3, 1.122e-3]),
    (Phi6, F6, 6, [3.655e-3, 1.672e-2, 1.580e-2, 4.021e-3]),
    (Phi6, F7, 7, [6.321e-4, 1.870e-3, 1.262e-3, 2.826e-4]),
];

/// Published summary counts, one row per method over f1..f7.
#[rustfmt::skip]
const SUMMARY_COUNTS: [[usize; 7]; 6] = [
    [12, 11, 10, 11, 12, 10, 11],
    [8, 7, 6, 7, 8, 6, 7],
    [6, 6, 5, 6, 6, 5, 5],
    [17, 18, 16, 16, 18, 14, 16],
    [9, 9, 9, 8, 10, 7, 8],
    [8, 8, 7, 7, 8, 6, 7],
];

/// Published summary intervals `[lo, hi]`, in the order bar, hat, tilde, breve.
#[rustfmt::skip]
const SUMMARY_INTERVALS: [[[f64; 2]; 4]; 6] = [
    [[2.8e-5, 1.1e-3], [5.6e-5, 2.2e-3], [3.7e-5, 1.5e-3], [6.0e-5, 1.2e-3]],
    [[8.9e-5, 3.3e-3], [1.4e-4, 9.9e-3], [1.0e-4, 6.0e-3], [2.1e-4, 4.5e-3]],
    [[8.8e-6, 1.3e-2], [3.5e-5, 5.1e-2], [2.0e-5, 3.0e-2], [1.6e-3, 1.2e-2]],
    [[8.1e-6, 5.8e-4], [1.2e-5, 9.4e-4], [7.9e-6, 6.8e-4], [3.2e-5, 5.5e-3]],
    [[5.5e-5, 3.0e-3], [1.3e-4, 7.2e-3], [1.0e-4, 4.4e-3], [1.9e-3, 3.3e-3]],
    [[3.6e-5, 3.7e-3], [1.6e-4, 1.7e-2], [1.4e-4, 1.6e-2], [2.8e-4, 4.5e-3]],
];

const ESTIMATORS: [&str; 4] = ["bar", "hat", "tilde", "breve"];

#[derive(Debug, Clone, Copy)]
enum Erratum {
    /// The row comes from a run with `x_{-1}` and `x_0` exchanged.
    SwappedSeeds,
    /// The row repeats the Δλ values of another cell.
    CopiedFrom(MethodId, ProblemId),
    /// One Δλ is printed `scale` times its value.
    Scaled { estimator: usize, scale: f64 },
}

const ERRATA: [(MethodId, ProblemId, Erratum); 5] = [
    (Phi2, F4, Erratum::CopiedFrom(Phi4, F4)),
    (Phi4, F4, Erratum::SwappedSeeds),
    (Phi6, F2, Erratum::SwappedSeeds),
    (
        Phi4,
        F6,
        Erratum::Scaled {
            estimator: 3,
            scale: 10.0,
        },
    ),
    (
        Phi5,
        F4,
        Erratum::Scaled {
            estimator: 1,
            scale: 0.1,
        },
    ),
];

/// Summary endpoints printed `scale` times the minimum of their own
/// per-cell column: (method, estimator, is_lo, scale).
const SUMMARY_ERRATA: [(MethodId, usize, bool, f64); 1] = [(Phi5, 3, true, 10.0)];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn method_row(m: MethodId) -> usize {
    MethodId::ALL.iter().position(|&x| x == m).unwrap()
}

fn problem_col(p: ProblemId) -> usize {
    ProblemId::ALL.iter().position(|&x| x == p).unwrap()
}

fn published(m: MethodId, p: ProblemId) -> (usize, [f64; 4]) {
    let row = PUBLISHED.iter().find(|r| r.0 == m && r.1 == p).unwrap();
    (row.2, row.3)
}

fn ours(grid: &GridReport, m: MethodId, p: ProblemId) -> Result<(usize, [f64; 4]), String> {
    let cell = grid.cell(m, p).ok_or(format!("{m}/{p} missing"))?;
    let i = cell
        .iteration_count()
        .ok_or(format!("{m}/{p} has no report"))?;
    let d = cell.deltas();
    if d.iter().any(Option::is_none) {
        return Err(format!("{m}/{p} lacks an estimate"));
    }
    Ok((i, d.map(Option::unwrap)))
}

struct Explained {
    count: usize,
    deltas: [f64; 4],
}

/// Carries out the computation an erratum claims the published row came from.
fn explain(
    grid: &GridReport,
    m: MethodId,
    p: ProblemId,
    erratum: Erratum,
) -> Result<Explained, String> {
    match erratum {
        Erratum::SwappedSeeds => {
            let mut tp = problems::problem(p);
            tp.x_minus1_x0 = (tp.x_minus1_x0.1, tp.x_minus1_x0.0);
            let report = driver::run_problem(
                m,
                &tp,
                EstimatorMode::Acloc,
                ETA,
                &PrecisionPolicy::default(),
            )
            .map_err(|e| e.to_string())?;
            let d = report.deltas_f64();
            if d.iter().any(Option::is_none) {
                return Err(format!("swapped-seed {m}/{p} lacks an estimate"));
            }
            Ok(Explained {
                count: report.i,
                deltas: d.map(Option::unwrap),
            })
        }
        Erratum::CopiedFrom(m2, p2) => {
            let (count, _) = ours(grid, m, p)?;
            let (_, deltas) = ours(grid, m2, p2)?;
            Ok(Explained { count, deltas })
        }
        Erratum::Scaled { estimator, scale } => {
            let (count, mut deltas) = ours(grid, m, p)?;
            deltas[estimator] *= scale;
            Ok(Explained { count, deltas })
        }
    }
}

fn erratum_for(m: MethodId, p: ProblemId) -> Option<Erratum> {
    ERRATA.iter().find(|e| e.0 == m && e.1 == p).map(|e| e.2)
}

/// Δλ values the published tables were built from: ours, with erratum cells
/// replaced by their verified explanation.
fn as_published_basis(grid: &GridReport, m: MethodId, p: ProblemId) -> Result<[f64; 4], String> {
    match erratum_for(m, p) {
        Some(e) => Ok(explain(grid, m, p, e)?.deltas),
        None => Ok(ours(grid, m, p)?.1),
    }
}

fn criterion_1(grid: &GridReport) -> Result<String, String> {
    let mut bad = Vec::new();
    let mut table_conflicts = Vec::new();
    for m in MethodId::ALL {
        for p in ProblemId::ALL {
            let (i, _) = ours(grid, m, p)?;
            let summary = SUMMARY_COUNTS[method_row(m)][problem_col(p)];
            let (appendix, _) = published(m, p);
            if i != summary {
                bad.push(format!("{m}/{p}: {i} vs {summary}"));
            }
            if appendix != summary {
                table_conflicts.push(format!("{m}/{p} printed {summary} and {appendix}"));
                if i != summary && i != appendix {
                    bad.push(format!("{m}/{p}: {i} matches neither printing"));
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    Ok(format!(
        "42/42 counts match the summary table; the two printings disagree on {}",
        table_conflicts.join(", ")
    ))
}

fn criterion_2(grid: &GridReport) -> Result<String, String> {
    let mut direct = 0;
    let mut via_errata = 0;
    let mut bad = Vec::new();
    let mut used = vec![false; ERRATA.len()];
    for &(m, p, _, printed) in &PUBLISHED {
        let (_, computed) = ours(grid, m, p)?;
        for k in 0..4 {
            if rel(computed[k], printed[k]) <= TOL {
                direct += 1;
                continue;
            }
            let Some(pos) = ERRATA.iter().position(|e| e.0 == m && e.1 == p) else {
                bad.push(format!(
                    "{m}/{p} {}: {:.4e} vs {:.4e}",
                    ESTIMATORS[k], computed[k], printed[k]
                ));
                continue;
            };
            used[pos] = true;
            let alt = explain(grid, m, p, ERRATA[pos].2)?;
            if rel(alt.deltas[k], printed[k]) <= TOL {
                via_errata += 1;
            } else {
                bad.push(format!(
                    "{m}/{p} {}: {:.4e} vs {:.4e}, erratum gives {:.4e}",
                    ESTIMATORS[k], computed[k], printed[k], alt.deltas[k]
                ));
            }
        }
    }
    // every erratum must reproduce its whole published row
    for (pos, &(m, p, e)) in ERRATA.iter().enumerate() {
        let alt = explain(grid, m, p, e)?;
        let (count, printed) = published(m, p);
        let row_ok = (0..4).all(|k| rel(alt.deltas[k], printed[k]) <= TOL);
        if !row_ok || alt.count != count {
            bad.push(format!(
                "erratum {m}/{p} ({e:?}) does not reproduce its row"
            ));
        }
        if !used[pos] {
            bad.push(format!("erratum {m}/{p} is not needed"));
        }
    }
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    let names: Vec<String> = ERRATA
        .iter()
        .map(|(m, p, e)| format!("{m}/{p} {e:?}"))
        .collect();
    Ok(format!(
        "{direct}/168 cells within 10% directly, {via_errata} through verified errata [{}]",
        names.join(", ")
    ))
}

fn interval_of(values: &[f64]) -> [f64; 2] {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    [lo, hi]
}

fn criterion_3(grid: &GridReport) -> Result<String, String> {
    let mut direct = 0;
    let mut via_errata = 0;
    let mut bad = Vec::new();
    for m in MethodId::ALL {
        for k in 0..4 {
            let est = EstimatorMode::ALL
                .into_iter()
                .find(|&e| convorder::harness::grid::estimator_index(e) == k)
                .unwrap();
            let iv = grid
                .interval(m, est)
                .ok_or(format!("{m} {} interval missing", ESTIMATORS[k]))?;
            let computed = [iv.lo, iv.hi];
            let mut basis = Vec::new();
            let mut appendix = Vec::new();
            for p in ProblemId::ALL {
                basis.push(as_published_basis(grid, m, p)?[k]);
                appendix.push(published(m, p).1[k]);
            }
            let basis = interval_of(&basis);
            let appendix = interval_of(&appendix);
            for (end, is_lo) in [(0, true), (1, false)] {
                let mut printed = SUMMARY_INTERVALS[method_row(m)][k][end];
                if rel(computed[end], printed) <= TOL {
                    direct += 1;
                    continue;
                }
                if let Some(&(_, _, _, scale)) = SUMMARY_ERRATA
                    .iter()
                    .find(|e| e.0 == m && e.1 == k && e.2 == is_lo)
                {
                    // the printed endpoint disagrees with its own column
                    if rel(appendix[end] * scale, printed) > TOL {
                        bad.push(format!(
                            "{m} {} summary erratum not confirmed by its column",
                            ESTIMATORS[k]
                        ));
                        continue;
                    }
                    printed /= scale;
                    if rel(computed[end], printed) <= TOL {
                        via_errata += 1;
                        continue;
                    }
                }
                if rel(basis[end], printed) <= TOL {
                    via_errata += 1;
                } else {
                    bad.push(format!(
                        "{m} {} {}: {:.2e} vs {:.2e}",
                        ESTIMATORS[k],
                        if is_lo { "lo" } else { "hi" },
                        computed[end],
                        printed
                    ));
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    Ok(format!(
        "{direct}/48 endpoints within 10% directly, {via_errata} through verified errata"
    ))
}

fn criterion_4(grid: &GridReport) -> Result<String, String> {
    let mut bad = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for cell in &grid.cells {
        if !cell.all_succeeded() || cell.runs.len() != 4 {
            bad.push(format!(
                "{}/{}: not all four modes succeeded",
                cell.method, cell.problem
            ));
            continue;
        }
        let agreement = cross_mode_agreement(cell, ETA).map_err(|e| e.to_string())?;
        if !agreement.same_i {
            bad.push(format!(
                "{}/{}: modes stop at different I",
                cell.method, cell.problem
            ));
        }
        if agreement.worst_excess > 0.0 {
            bad.push(format!(
                "{}/{}: iterates differ beyond working precision ({:?})",
                cell.method, cell.problem, agreement.worst_at
            ));
        }
        worst = worst.max(agreement.worst_excess);
    }
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    Ok(format!(
        "42 cells, same I in all modes, worst log10 excess over the rounding bound {worst:.2}"
    ))
}

fn criterion_5(grid: &GridReport) -> Result<String, String> {
    let mut bad = Vec::new();
    for p in ProblemId::ALL {
        let (_, [bar, hat, tilde, _]) = ours(grid, Phi1, p)?;
        let (r_hat, r_tilde) = (hat / bar, tilde / bar);
        if !(1.9..=2.1).contains(&r_hat) || !(1.30..=1.37).contains(&r_tilde) {
            bad.push(format!("phi1/{p}: ratios {r_hat:.3}, {r_tilde:.3}"));
        }
    }
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let mut secant_ok = 0;
    for p in ProblemId::ALL {
        let (_, [bar, hat, _, _]) = ours(grid, Phi4, p)?;
        if rel(hat / bar, golden) <= TOL {
            secant_ok += 1;
        }
    }
    if secant_ok < 6 {
        bad.push(format!(
            "phi4: only {secant_ok}/7 ratios near the golden ratio"
        ));
    }
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    Ok(format!(
        "phi1 ratios in range on 7/7, phi4 on {secant_ok}/7"
    ))
}

fn criterion_6() -> Result<String, String> {
    let models = default_models();
    let report = verify_propositions(&models).map_err(|e| e.to_string())?;
    let mut bad: Vec<String> = report
        .checked
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{:?}", c.model))
        .collect();
    // a rejected model must be one whose first step already fails to contract
    for s in &report.skipped {
        let m = &s.model;
        let c: f64 = m.c.parse().unwrap();
        let e0: f64 = m.e0.parse().unwrap();
        let rho = parse_rho(&m.rho, 30).map_err(|e| e.to_string())?.to_f64();
        if c.abs() * e0.powf(rho) < e0 {
            bad.push(format!("{m:?} rejected although it contracts"));
        }
    }
    if report.checked.iter().any(|c| c.log10_abs_e_n > -50.0) {
        bad.push("a model stopped above |e_n| = 1e-50".into());
    }
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    Ok(format!(
        "{}/{} models pass every check, {} rejected as non-contracting (C e0^rho >= e0)",
        report.checked.len(),
        models.len(),
        report.skipped.len()
    ))
}

fn criterion_7() -> Result<String, String> {
    let mut bad = Vec::new();

    for p in ProblemId::ALL {
        let tp = problems::problem(p);
        let root = cached_reference_root(&tp, ETA + 64).map_err(|e| e.to_string())?;
        let published = tp.root_25(60);
        let magnitude = precision::log10_abs(&published).to_f64().floor() as i64;
        let half_ulp = precision::pow10(magnitude - 24, 30) / 2u32;
        let diff = Float::with_val(digits_to_bits(60), &root.value - &published).abs();
        if diff > half_ulp {
            bad.push(format!(
                "{p}: reference root disagrees with the 25-digit value"
            ));
        }
    }

    let mut fd_checks = 0;
    for p in ProblemId::ALL {
        let tp = problems::problem(p);
        let (a, b) = tp.x_minus1_x0;
        for x in [tp.x0, a, b] {
            let x = precision::parse_decimal(x, 30).unwrap();
            let h = precision::pow10(-8, 30);
            for order in 1..=3u8 {
                let up = Float::with_val(x.prec(), &x + &h);
                let down = Float::with_val(x.prec(), &x - &h);
                let fu = tp.eval(&up, order - 1, 30).map_err(|e| e.to_string())?;
                let fd = tp.eval(&down, order - 1, 30).map_err(|e| e.to_string())?;
                let approx =
                    Float::with_val(x.prec(), &fu - &fd) / Float::with_val(x.prec(), &h * 2u32);
                let exact = tp.eval(&x, order, 30).map_err(|e| e.to_string())?;
                let err = (Float::with_val(x.prec(), &approx - &exact) / &exact)
                    .abs()
                    .to_f64();
                fd_checks += 1;
                if err.is_nan() || err >= 1e-10 {
                    bad.push(format!(
                        "{p} order {order} at {}: relative error {err:.1e}",
                        x.to_f64()
                    ));
                }
            }
        }
    }

    let d50 = |s: &str| precision::parse_decimal(s, 50).unwrap();
    for (a, b, r) in [
        ("5", "3", "0.1"),
        ("-2.25", "0.7", "-0.37"),
        ("1e3", "-4", "0.5"),
    ] {
        let (a, b, r) = (d50(a), d50(b), d50(r));
        let x = |k: u32| {
            let rk = Float::with_val(a.prec(), (&r).pow(k));
            Float::with_val(a.prec(), &a + Float::with_val(a.prec(), &b * &rk))
        };
        let ex = estimators::aitken_alpha(&x(2), &x(1), &x(0)).map_err(|e| e.to_string())?;
        let err = Float::with_val(a.prec(), &ex.alpha_tilde - &a).abs();
        let scale = Float::with_val(a.prec(), a.abs_ref()).max(&Float::with_val(a.prec(), 1u32));
        if err > scale * precision::pow10(-45, 30) {
            bad.push(format!(
                "Aitken not exact on geometric sequence with limit {}",
                a.to_f64()
            ));
        }
    }

    let rho = |s: &str| parse_rho(s, 40).unwrap();
    let schedule = [
        (EstimatorMode::Cloc, "2", -100, 204),
        (EstimatorMode::Ecloc, "2", -99, 269),
        (EstimatorMode::Pcloc, "3", -50, 234),
        (EstimatorMode::Acloc, "2", -50, 416),
    ];
    for (mode, r, exp, want) in schedule {
        let got = adaptive_digits(mode, &rho(r), &precision::pow10(exp, 40))
            .map_err(|e| e.to_string())?;
        if got != want {
            bad.push(format!("{mode} schedule: {got} vs {want}"));
        }
    }
    let thresholds = [
        (EstimatorMode::Cloc, 2200.0),
        (EstimatorMode::Acloc, 550.0),
        (EstimatorMode::Ecloc, 1650.0),
        (EstimatorMode::Pcloc, 1100.0),
    ];
    for (mode, want) in thresholds {
        let got = mode.threshold_exponent(&rho("2"), ETA).to_f64();
        if (got - want).abs() > 1e-9 {
            bad.push(format!("{mode} threshold: {got} vs {want}"));
        }
    }
    let stops = [
        (EstimatorMode::Cloc, -2201, true),
        (EstimatorMode::Ecloc, -1600, false),
        (EstimatorMode::Pcloc, -1101, true),
    ];
    for (mode, exp, want) in stops {
        if should_stop(mode, &rho("2"), ETA, &precision::pow10(exp, 40)) != want {
            bad.push(format!("{mode} stop at 1e{exp} should be {want}"));
        }
    }

    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    Ok(format!(
        "7 roots, {fd_checks} finite-difference checks, 3 geometric sequences, 4 schedules, 4 thresholds"
    ))
}

fn main() -> ExitCode {
    let config = GridConfig {
        eta: ETA,
        ..GridConfig::default()
    };
    let grid = match run_grid(&config) {
        Ok(grid) => grid,
        Err(e) => {
            println!("acceptance: FAIL grid did not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    let results = [
        ("1 iteration counts", criterion_1(&grid)),
        ("2 per-cell delta lambda", criterion_2(&grid)),
        ("3 summary intervals", criterion_3(&grid)),
        ("4 cross-mode iterates", criterion_4(&grid)),
        ("5 error-ratio structure", criterion_5(&grid)),
        ("6 synthetic propositions", criterion_6()),
        ("7 foundation checks", criterion_7()),
    ];
    let mut failed = 0;
    for (name, result) in results {
        match result {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
