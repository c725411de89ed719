//! One function per experiment kind. Each returns CSV tables and verdict checks.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use martapprox::chain::StartSpec;
use martapprox::clt::{
    self, chaining_bound, conditional_clt_stat, example3_stat, lindeberg_report, max_partial_sum_stat,
    max_square_partial_sum, mc_mean_with_se, mixing_clt_experiment, remainder_max_stat, v_sup_stat, Example3Law,
    LINDEBERG_EPS,
};
use martapprox::linear::{condition9_report, growth_exponent_fit, sigma2_sq, Condition9Thresholds, Verdict};
use martapprox::martingale::{difference_function, equivalence_gap, error_bound_report};
use martapprox::poisson::{h_n_averaged, h_n_partial, resolvent, resolvent_for_horizon, resolvent_residual, residual_eq5};
use martapprox::report::{self, CsvTable, Metadata};
use martapprox::rng::RootSeed;
use martapprox::variance::{ell_profile, sigma_n_sq, sigma_n_sq_raw};
use martapprox::MarkovModel;

use crate::config::{CoefficientSpec, RunConfig};
use crate::error::{io_err, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.to_string(), pass, detail: detail.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub csv: Vec<CsvEntry>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Output {
    tables: Vec<(String, CsvTable)>,
    checks: Vec<Check>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    root: RootSeed,
    meta: Metadata,
}

fn grid_label(grid: &[usize]) -> String {
    grid.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs the experiment, writes its CSVs and `<kind>.run.json` into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut warnings = Vec::new();
    let model = if cfg.model.is_some() && cfg.coefficients.is_none() {
        let (m, w) = cfg.load_model()?;
        warnings.extend(w);
        Some(m)
    } else {
        None
    };
    let subject_hash = match (&model, &cfg.coefficients) {
        (Some(m), _) => m.hash().to_string(),
        (None, Some(c)) => sha256_hex(serde_json::to_string(c).expect("serializes").as_bytes()),
        (None, None) => sha256_hex(cfg.kind.as_bytes()),
    };
    let meta = Metadata::standard(&subject_hash, grid_label(&cfg.grid), cfg.ensemble, cfg.root_seed)
        .with("kind", &cfg.kind)
        .with("config_hash", cfg.hash());
    let ctx = Ctx { cfg, root: RootSeed(cfg.root_seed), meta };
    let need_model = || model.as_ref().ok_or_else(|| CliError::Config(format!("{} needs a model", cfg.kind)));

    let output = match cfg.kind.as_str() {
        "theorem1_bound" => theorem1_bound(&ctx, need_model()?)?,
        "poisson_residual" => poisson_residual(&ctx, need_model()?)?,
        "equivalence_gap" => equivalence(&ctx, need_model()?)?,
        "variance_profile" => variance_profile(&ctx, need_model()?)?,
        k if k.starts_with("example1_") => linear(&ctx)?,
        "conditional_clt" => conditional(&ctx, need_model()?)?,
        "lindeberg" => lindeberg(&ctx, need_model()?)?,
        "v_sup" => v_sup(&ctx, need_model()?)?,
        "remainder_max" => remainder(&ctx, need_model()?)?,
        "chaining" => chaining(&ctx, need_model()?)?,
        "alpha_mixing" => alpha(&ctx, need_model()?)?,
        "example3" => example3(&ctx)?,
        "coboundary" => coboundary(&ctx, need_model()?)?,
        "mixing_clt" => mixing(&ctx, need_model()?)?,
        other => return Err(crate::catalog::lookup(other).err().unwrap_or_else(|| CliError::Config(format!("{other} has no runner")))),
    };

    let mut csv = Vec::new();
    for (file, table) in &output.tables {
        let text = table.render();
        let path = out.join(file);
        std::fs::write(&path, &text).map_err(io_err(&path))?;
        csv.push(CsvEntry { file: file.clone(), sha256: sha256_hex(text.as_bytes()) });
    }
    let outcome = RunOutcome { csv, checks: output.checks, warnings };
    crate::manifest::write_run_record(cfg, &outcome, out)?;
    Ok(outcome)
}

fn theorem1_bound(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let slack = ctx.cfg.thresholds.bound_slack;
    let reports = ctx.cfg.grid.iter().map(|&n| error_bound_report(m, n)).collect::<Result<Vec<_>, _>>()?;
    let worst = reports.iter().map(|r| r.max_error - r.bound).fold(f64::NEG_INFINITY, f64::max);
    let table = report::error_bound_csv(&reports, ctx.meta.clone());
    Ok(Output {
        tables: vec![("theorem1_bound.csv".into(), table)],
        checks: vec![check("error_bound", worst <= slack, format!("max(error - bound) = {worst:.3e} over {} sizes", reports.len()))],
    })
}

fn poisson_residual(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let g = m.g_values();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &n in &ctx.cfg.grid {
        let ho = h_n_partial(m, n)?;
        let qho = m.apply_kernel(&ho.h)?;
        let qng = m.kernel_power_apply(&m.g(), n)?;
        let h = h_n_averaged(m, n)?;
        let qh = m.apply_kernel(&h.h)?;
        let (mut partial, mut averaged) = (0.0f64, 0.0f64);
        for x in 0..m.num_states() {
            partial = partial.max((ho.h.values()[x] - qho.values()[x] - g[x] + qng.values()[x]).abs());
            averaged = averaged.max((h.h.values()[x] - qh.values()[x] - g[x] + qho.values()[x] / n as f64).abs());
        }
        let res = if n >= 2 {
            let f = resolvent_for_horizon(m, n)?;
            resolvent_residual(m, &f.h, 1.0 / n as f64)
        } else {
            f64::NAN
        };
        let sigma = sigma_n_sq_raw(m, n).max(0.0).sqrt();
        let ratio = if sigma > 0.0 { residual_eq5(m, &h, n, sigma)?.ratio } else { f64::NAN };
        worst = worst.max(partial).max(averaged);
        if res.is_finite() {
            worst = worst.max(res);
        }
        rows.push(vec![n as f64, partial, averaged, res, ratio]);
    }
    for eps in [1e-4, 1e-2, 0.5] {
        worst = worst.max(resolvent_residual(m, &resolvent(m, eps)?.h, eps));
    }
    let tol = ctx.cfg.thresholds.identity_tol;
    let table = report::series_csv(
        &["n", "partial_identity", "averaged_identity", "resolvent_identity", "residual_ratio"],
        &rows,
        ctx.meta.clone(),
    );
    Ok(Output {
        tables: vec![("poisson_residual.csv".into(), table)],
        checks: vec![check("poisson_identities", worst <= tol, format!("max residual {worst:.3e} (tol {tol:e})"))],
    })
}

fn equivalence(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    if ctx.cfg.grid[0] < 2 {
        return Err(CliError::Config("equivalence_gap needs n >= 2".into()));
    }
    let mut rows = Vec::new();
    for &n in &ctx.cfg.grid {
        let a = difference_function(m, &h_n_averaged(m, n)?)?;
        let b = difference_function(m, &resolvent_for_horizon(m, n)?)?;
        let sigma = sigma_n_sq(m, n)?.sqrt();
        rows.push(vec![n as f64, equivalence_gap(m, &a, &b, n, sigma)?]);
    }
    let gaps: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = *gaps.last().expect("non-empty grid");
    let lim = ctx.cfg.thresholds.equivalence_final;
    Ok(Output {
        tables: vec![("equivalence_gap.csv".into(), report::series_csv(&["n", "gap"], &rows, ctx.meta.clone()))],
        checks: vec![check(
            "equivalence",
            decreasing && last < lim,
            format!("first {:.3e}, last {last:.3e} (< {lim}), decreasing = {decreasing}", gaps[0]),
        )],
    })
}

fn variance_profile(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let p = ell_profile(m, &ctx.cfg.grid)?;
    let ratio = *p.ratio4().last().expect("non-empty grid");
    let lim = ctx.cfg.thresholds.ratio4_final;
    Ok(Output {
        tables: vec![("variance_profile.csv".into(), report::variance_profile_csv(&p, ctx.meta.clone()))],
        checks: vec![check("ratio4", ratio < lim, format!("||E(S_n|X_0)||/sigma_n at the last point = {ratio:.3e} (< {lim})"))],
    })
}

fn linear(ctx: &Ctx) -> Result<Output, CliError> {
    let t = &ctx.cfg.thresholds;
    let spec = ctx.cfg.coefficients.as_ref().expect("validated");
    let c = spec.build()?;
    let thresholds =
        Condition9Thresholds { holds_below: t.condition9_holds_below, stable_rel_change: t.condition9_stable_rel_change };
    let rep = condition9_report(&c, &ctx.cfg.grid, t.sigma1_tol, thresholds)?;
    let expected = match spec {
        CoefficientSpec::PowerLaw { .. } => Verdict::Fails,
        _ => Verdict::Holds,
    };
    let ratios: Vec<String> = rep.rows.iter().map(|r| format!("{:.4}", r.ratio9)).collect();
    let mut checks = vec![check(
        "condition9",
        rep.verdict == expected,
        format!("verdict {} (expected {expected}), ratio9 = [{}]", rep.verdict, ratios.join(", ")),
    )];
    if let CoefficientSpec::PowerLaw { beta } = spec {
        let s2 = ctx.cfg.grid.iter().map(|&n| sigma2_sq(&c, n)).collect::<Result<Vec<_>, _>>()?;
        let fit = growth_exponent_fit(&s2, &ctx.cfg.grid)?;
        let target = 3.0 - 2.0 * beta;
        checks.push(check(
            "growth_exponent",
            (fit.exponent - target).abs() <= t.exponent_tol,
            format!("sigma_n2^2 exponent {:.4} vs {target} ± {}", fit.exponent, t.exponent_tol),
        ));
    }
    let file = format!("{}.csv", ctx.cfg.kind);
    Ok(Output { tables: vec![(file, report::linear_csv(&rep.rows, rep.verdict, ctx.meta.clone()))], checks })
}

/// Decreasing except for at most one rise of size `≤ slack`.
fn decreasing_with_one_inversion(v: &[f64], slack: f64) -> (bool, Vec<f64>) {
    let rises: Vec<f64> = v.windows(2).filter(|w| w[1] >= w[0]).map(|w| w[1] - w[0]).collect();
    (rises.is_empty() || (rises.len() == 1 && rises[0] <= slack), rises)
}

fn conditional(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let t = &ctx.cfg.thresholds;
    let results = ctx
        .cfg
        .grid
        .iter()
        .enumerate()
        .map(|(i, &n)| conditional_clt_stat(m, n, ctx.cfg.ensemble, ctx.root.derive(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let stats: Vec<f64> = results.iter().map(|r| r.integrated).collect();
    let (trend, rises) = decreasing_with_one_inversion(&stats, t.clt_inversion);
    let last = *stats.last().expect("non-empty grid");
    Ok(Output {
        tables: vec![("clt.csv".into(), report::clt_csv(&results, m.states(), ctx.meta.clone()))],
        checks: vec![check(
            "conditional_clt",
            last <= t.clt_final && trend,
            format!("integrated {stats:.4?} (last <= {}), rises {rises:.4?}, DKW floor {:.4}", t.clt_final, results[0].floor),
        )],
    })
}

fn lindeberg(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let t = &ctx.cfg.thresholds;
    let mut eps: Vec<f64> = LINDEBERG_EPS.to_vec();
    if !eps.contains(&t.lindeberg_eps) {
        eps.push(t.lindeberg_eps);
    }
    let mut reports = Vec::new();
    for (i, &n) in ctx.cfg.grid.iter().enumerate() {
        let h = difference_function(m, &h_n_averaged(m, n)?)?;
        reports.push(lindeberg_report(m, &h, n, ctx.cfg.ensemble, ctx.root.derive(i as u64), &eps)?);
    }
    let last = reports.last().expect("non-empty grid");
    let mean_ok = (t.lindeberg_mean_lo..=t.lindeberg_mean_hi).contains(&last.mean_v);
    let beyond: Vec<&clt::LindebergReport> = reports.iter().filter(|r| t.lindeberg_eps * r.sigma_n > r.max_abs_h).collect();
    let vanish = !beyond.is_empty()
        && beyond.iter().all(|r| r.truncated.iter().any(|(e, v)| *e == t.lindeberg_eps && *v == 0.0));
    let first_beyond = beyond.first().map(|r| r.n.to_string()).unwrap_or_else(|| "none".into());
    Ok(Output {
        tables: vec![("lindeberg.csv".into(), report::lindeberg_csv(&reports, ctx.meta.clone()))],
        checks: vec![
            check(
                "mean_V",
                mean_ok,
                format!("mean V_n(1) = {:.5} at n = {} (exact {:.5})", last.mean_v, last.n, last.exact_mean_v),
            ),
            check(
                "truncation_vanishes",
                vanish,
                format!("eps = {}: first grid n with eps sigma_n > max|H_n| is {first_beyond}", t.lindeberg_eps),
            ),
        ],
    })
}

fn v_sup(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let mut rows = Vec::new();
    for (i, &n) in ctx.cfg.grid.iter().enumerate() {
        let h = difference_function(m, &h_n_averaged(m, n)?)?;
        let s = v_sup_stat(m, &h, n, ctx.cfg.ensemble, ctx.root.derive(i as u64))?;
        rows.push(vec![n as f64, s.median, s.q90, s.max]);
    }
    let (first, last) = (rows[0][1], rows[rows.len() - 1][1]);
    Ok(Output {
        tables: vec![("v_sup.csv".into(), report::series_csv(&["n", "median", "q90", "max"], &rows, ctx.meta.clone()))],
        checks: vec![check("v_sup_shrinks", last < first, format!("median {first:.4e} -> {last:.4e}"))],
    })
}

fn remainder(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let t = &ctx.cfg.thresholds;
    let mut stats = Vec::new();
    for (i, &n) in ctx.cfg.grid.iter().enumerate() {
        stats.push(remainder_max_stat(m, n, ctx.cfg.ensemble, ctx.root.derive(i as u64), t.limit_tol)?);
    }
    let probs: Vec<(usize, f64)> = stats
        .iter()
        .filter(|s| s.n >= t.remainder_from_n)
        .map(|s| (s.n, s.samples.iter().filter(|&&v| v >= t.remainder_eps).count() as f64 / s.samples.len() as f64))
        .collect();
    let ok = !probs.is_empty() && probs.iter().all(|(_, p)| *p == 0.0);
    Ok(Output {
        tables: vec![("remainder.csv".into(), report::remainder_csv(&stats, ctx.meta.clone()))],
        checks: vec![check(
            "remainder_zero",
            ok,
            format!("P[max|R_j| >= {} sqrt(n)] for n >= {}: {probs:?}", t.remainder_eps, t.remainder_from_n),
        )],
    })
}

fn chaining(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let k = ctx.cfg.thresholds.chaining_se;
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, &n) in ctx.cfg.grid.iter().enumerate() {
        let d = n.next_power_of_two().trailing_zeros();
        let norms: Vec<f64> = (0..=d).map(|j| sigma_n_sq_raw(m, 1 << j).max(0.0).sqrt()).collect();
        let bound = chaining_bound(&norms, n)?;
        let samples = m.map_paths(n, ctx.cfg.ensemble, StartSpec::Stationary, ctx.root.derive(i as u64), |_, _, p| {
            max_square_partial_sum(p.iter().map(|&x| m.g_values()[x as usize]))
        })?;
        let (mean, se) = mc_mean_with_se(&samples);
        ok &= bound >= mean - k * se;
        rows.push(vec![n as f64, bound, mean, se]);
    }
    let detail = rows.iter().map(|r| format!("n={}: {:.1} vs {:.1}±{:.1}", r[0], r[1], r[2], r[3])).collect::<Vec<_>>().join("; ");
    Ok(Output {
        tables: vec![("chaining.csv".into(), report::series_csv(&["n", "bound", "mc_mean", "mc_se"], &rows, ctx.meta.clone()))],
        checks: vec![check("chaining_dominates", ok, detail)],
    })
}

fn alpha(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for &n in &ctx.cfg.grid {
        let a = clt::alpha_mixing_exact(m, n)?;
        let ratio = rows.last().map(|r| a / r[1]).unwrap_or(f64::NAN);
        rows.push(vec![n as f64, a, ratio]);
    }
    let alphas: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let ok = alphas.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let last = rows.last().expect("non-empty grid");
    Ok(Output {
        tables: vec![("alpha_mixing.csv".into(), report::series_csv(&["n", "alpha", "ratio"], &rows, ctx.meta.clone()))],
        checks: vec![check("alpha_nonincreasing", ok, format!("alpha_1.. = {:.4e} .. {:.4e}, last ratio {:.9}", alphas[0], last[1], last[2]))],
    })
}

fn example3(ctx: &Ctx) -> Result<Output, CliError> {
    let t = &ctx.cfg.thresholds;
    let mut heavy = Vec::new();
    let mut control = Vec::new();
    for (i, &n) in ctx.cfg.grid.iter().enumerate() {
        heavy.push(example3_stat(n, ctx.cfg.ensemble, ctx.root.derive(2 * i as u64), Example3Law::HeavyTail)?);
        control.push(example3_stat(n, ctx.cfg.ensemble, ctx.root.derive(2 * i as u64 + 1), Example3Law::Bounded)?);
    }
    let growth = heavy[heavy.len() - 1].median / heavy[0].median;
    let shrink = control[0].median / control[control.len() - 1].median;
    Ok(Output {
        tables: vec![
            ("example3.csv".into(), report::example3_csv(&heavy, ctx.meta.clone())),
            ("example3_control.csv".into(), report::example3_csv(&control, ctx.meta.clone().with("law", "bounded"))),
        ],
        checks: vec![
            check("heavy_tail_growth", growth >= t.example3_growth, format!("median grows x{growth:.3} (need >= {})", t.example3_growth)),
            check("bounded_control", shrink >= t.control_shrink, format!("median shrinks /{shrink:.3} (need >= {})", t.control_shrink)),
        ],
    })
}

fn coboundary(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let stats = ctx
        .cfg
        .grid
        .iter()
        .enumerate()
        .map(|(i, &n)| max_partial_sum_stat(m, n, ctx.cfg.ensemble, ctx.root.derive(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let shrink = stats[0].median / stats[stats.len() - 1].median;
    let lim = ctx.cfg.thresholds.coboundary_shrink;
    Ok(Output {
        tables: vec![("coboundary.csv".into(), report::example3_csv(&stats, ctx.meta.clone()))],
        checks: vec![check("max_partial_sum_shrinks", shrink >= lim, format!("median max|S_k|/sqrt(n) shrinks /{shrink:.3} (need >= {lim})"))],
    })
}

fn mixing(ctx: &Ctx, m: &MarkovModel) -> Result<Output, CliError> {
    let rows = mixing_clt_experiment(m, &ctx.cfg.grid, ctx.cfg.ensemble, ctx.root)?;
    let alpha_ok = rows.windows(2).all(|w| w[1].alpha <= w[0].alpha * (1.0 + 1e-12));
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let ok = alpha_ok && last.conditional_integrated < first.conditional_integrated && last.unconditional_levy < first.unconditional_levy;
    Ok(Output {
        tables: vec![("mixing_clt.csv".into(), report::mixing_clt_csv(&rows, ctx.meta.clone()))],
        checks: vec![check(
            "all_columns_decay",
            ok,
            format!(
                "alpha {:.3e} -> {:.3e}, unconditional {:.4} -> {:.4}, conditional {:.4} -> {:.4}",
                first.alpha, last.alpha, first.unconditional_levy, last.unconditional_levy, first.conditional_integrated, last.conditional_integrated
            ),
        )],
    })
}
