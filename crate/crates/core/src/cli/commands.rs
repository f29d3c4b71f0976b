//! The subcommands. Each reads its sections of the config, converts units
//! once, runs the library and writes its files plus a manifest.

use std::fs::File;
use std::io::BufReader;

use serde::Serialize;
use serde_json::json;

use super::config::{GroupBy, LawKind, RunConfig, TimeSection};
use super::output::{gnuplot_stub, num, opt, OutputDir, Table};
use super::Context;
use crate::analysis::{
    collapse_quality, fit_powerlaw, fit_saturation, half_rise_guess, read_external_runs, rescale,
    CollapseGroup, CollapseReport, ExternalRun, PowerLawFit, RescaleContext, RunRecord,
    SaturationFit, ScalingPoint, REFERENCE_EXPONENTS,
};
use crate::error::{Error, Result};
use crate::lda::{effective_line_density, lda_average_with, CloudSpec, LdaWarning, LocalLaw};
use crate::meanfield::eos_solve;
use crate::params::{critical_exponents, nondimensionalize, CriticalExponents, PhysicalParams};
use crate::quantum::{disorder_average, DisorderRun};
use crate::sweep::{run_sweep, SweepPoint, SweepSpec, TimeGrid};
use crate::units::{parse_quantity, Quantity};

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref()
        .ok_or_else(|| config_err(format!("missing [{name}] section")))
}

fn exponent_rows(e: &CriticalExponents) -> [(&'static str, String, f64); 5] {
    [
        ("beta", e.beta.to_string(), e.beta.value()),
        (
            "1/delta",
            e.one_over_delta.to_string(),
            e.one_over_delta.value(),
        ),
        ("gamma", e.gamma.to_string(), e.gamma.value()),
        ("z", e.z.to_string(), e.z.value()),
        ("nu", e.nu.to_string(), e.nu.value()),
    ]
}

pub fn exponents(ctx: &Context, d: Option<u32>, p: Option<u32>) -> Result<()> {
    let model = ctx.config.model.as_ref();
    let d = d
        .or(model.map(|m| m.dimension))
        .ok_or_else(|| config_err("give --d or model.dimension"))?;
    let p = p.or(model.map(|m| m.interaction_exponent)).unwrap_or(6);
    let e = critical_exponents(d, p)?;

    println!("critical exponents for d = {d}, p = {p}");
    println!("{:<8} {:>7} {:>12}", "name", "exact", "decimal");
    for (name, exact, value) in exponent_rows(&e) {
        println!("{name:<8} {exact:>7} {value:>12.6}");
    }
    println!();
    println!("reference values (p = 6)");
    println!(
        "{:<2} {:<8} {:>6} {:>8} {:>7}  origin",
        "d", "name", "theory", "value", "+/-"
    );
    for r in REFERENCE_EXPONENTS {
        let theory = critical_exponents(r.dimension, 6)?;
        let exact = if r.name == "gamma" {
            theory.gamma
        } else {
            theory.one_over_delta
        };
        let unc = r
            .uncertainty
            .map(|u| format!("{u}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<2} {:<8} {:>6} {:>8} {:>7}  {}",
            r.dimension,
            r.name,
            exact.to_string(),
            r.value,
            unc,
            r.origin
        );
    }

    if ctx.out_given {
        let mut out = OutputDir::create(&ctx.out)?;
        let mut t = Table::new(&["name", "exact", "decimal"]);
        t.comment(format!("critical exponents, d = {d}, p = {p}"));
        for (name, exact, value) in exponent_rows(&e) {
            t.row(vec![name.into(), exact, num(value)]);
        }
        out.table("exponents.csv", &t)?;
        let mut refs = Table::new(&["dimension", "name", "value", "uncertainty", "origin"]);
        refs.comment("published exponents for p = 6, for annotation only");
        for r in REFERENCE_EXPONENTS {
            refs.row(vec![
                r.dimension.to_string(),
                r.name.into(),
                num(r.value),
                opt(r.uncertainty),
                r.origin.into(),
            ]);
        }
        out.table("reference_exponents.csv", &refs)?;
        out.manifest(
            "exponents",
            &ctx.effective_config(),
            json!({ "dimension": d, "interaction_exponent": p, "exponents": e }),
        )?;
    }
    Ok(())
}

pub fn eos(ctx: &Context) -> Result<()> {
    let model = ctx.config.model()?;
    let grid = section(&ctx.config.eos, "eos")?;
    let (d, p) = (model.dimension, model.interaction_exponent);
    critical_exponents(d, p)?;
    let alphas = grid.alpha.values("eos.alpha")?;
    let deltas = grid.delta.values("eos.delta")?;
    if alphas.iter().any(|a| *a < 0.0) {
        return Err(config_err("eos.alpha must be non-negative"));
    }
    let two_p_d = (2 * p + d) as f64;

    let mut t = Table::new(&[
        "alpha",
        "delta",
        "f_r",
        "unclamped",
        "branch",
        "saturated",
        "y",
        "chi",
    ]);
    t.comment(format!("mean-field equation of state, d = {d}, p = {p}"));
    t.comment("units: alpha, delta in E_c; y = delta alpha^(-2p/(2p+d)); chi = unclamped alpha^(-2d/(2p+d))");
    for &a in &alphas {
        for &delta in &deltas {
            let s = eos_solve(a, delta, d, p)?;
            let (y, chi) = if a > 0.0 {
                (
                    num(delta / a.powf(2.0 * p as f64 / two_p_d)),
                    num(s.unclamped / a.powf(2.0 * d as f64 / two_p_d)),
                )
            } else {
                (String::new(), String::new())
            };
            t.row(vec![
                num(a),
                num(delta),
                num(s.f_r),
                num(s.unclamped),
                serde_json::to_value(s.branch)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                s.saturated.to_string(),
                y,
                chi,
            ]);
        }
    }
    let mut out = OutputDir::create(&ctx.out)?;
    out.table("eos.csv", &t)?;
    out.write(
        "eos.gp",
        gnuplot_stub(
            "eos.csv",
            "mean-field equation of state",
            "alpha",
            "f_R",
            "xy",
            &[(1, 3, "f_R")],
        )
        .as_bytes(),
    )?;
    out.manifest(
        "eos",
        &ctx.effective_config(),
        json!({ "dimension": d, "interaction_exponent": p, "alpha": alphas, "delta": deltas }),
    )?;
    println!(
        "eos: {} x {} grid written to {}",
        alphas.len(),
        deltas.len(),
        out.path("eos.csv").display()
    );
    Ok(())
}

fn default_time() -> TimeSection {
    TimeSection {
        t_max: None,
        duration: None,
        span: Some(TimeGrid::default().span),
        points: TimeGrid::default().points,
    }
}

pub fn simulate(ctx: &Context) -> Result<()> {
    let cfg = &ctx.config;
    let ensemble = cfg.ensemble()?;
    let (params, phys) = cfg.model()?.resolve(ensemble.atoms as u64)?;
    let times = cfg
        .time
        .clone()
        .unwrap_or_else(default_time)
        .resolve(&params, phys.as_ref())?;
    let run = DisorderRun {
        params,
        atom_count: ensemble.atoms,
        geometry: cfg.resolve_geometry()?,
        realizations: ensemble.realizations,
        basis: cfg.resolve_basis()?,
        times,
        options: cfg.resolve_propagation(),
        master_seed: ctx.seed,
        r_min: cfg.r_min(),
    };
    let result = disorder_average(&run)?;
    let units = phys.as_ref().map(PhysicalParams::natural_units);

    let mut columns = vec!["tau", "f_r_mean", "f_r_stderr", "realization_count"];
    if units.is_some() {
        columns.push("t_s");
    }
    let mut t = Table::new(&columns);
    t.comment(format!(
        "d = {}, p = {}, alpha = {:?}, delta = {:?}",
        params.dimension, params.interaction_exponent, params.alpha, params.delta
    ));
    t.comment(format!(
        "atoms = {}, realizations = {}, master_seed = {}",
        run.atom_count, run.realizations, run.master_seed
    ));
    t.comment(if units.is_some() {
        "units: tau in hbar/E_c; t_s in seconds"
    } else {
        "units: tau in hbar/E_c"
    });
    let traj = &result.trajectory;
    for i in 0..traj.times.len() {
        let mut row = vec![
            num(traj.times[i]),
            num(traj.f_r_mean[i]),
            num(traj.f_r_stderr[i]),
            traj.realization_count.to_string(),
        ];
        if let Some(u) = units {
            row.push(num(traj.times[i] * u.time));
        }
        t.row(row);
    }

    let mut reports = Table::new(&[
        "index",
        "seed",
        "max_excitations",
        "dimension",
        "norm_drift",
        "energy_drift",
        "top_sector_population",
        "method",
    ]);
    reports.comment("one row per disorder realization");
    for r in &result.reports {
        reports.row(vec![
            r.index.to_string(),
            r.seed.to_string(),
            r.max_excitations.to_string(),
            r.dimension.to_string(),
            num(r.norm_drift),
            num(r.energy_drift),
            num(r.top_sector_population),
            serde_json::to_value(r.method)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
        ]);
    }

    let mut out = OutputDir::create(&ctx.out)?;
    out.table("simulate.csv", &t)?;
    out.table("simulate_realizations.csv", &reports)?;
    out.write(
        "simulate.gp",
        gnuplot_stub(
            "simulate.csv",
            "Rydberg fraction",
            "tau",
            "f_R",
            "",
            &[(1, 2, "f_R")],
        )
        .as_bytes(),
    )?;
    out.manifest(
        "simulate",
        &ctx.effective_config(),
        json!({
            "model": params,
            "physical": phys,
            "natural_units": units,
            "basis": run.basis,
            "propagation": run.options,
            "max_norm_drift": result.max_norm_drift(),
            "max_energy_drift": result.max_energy_drift(),
        }),
    )?;
    println!(
        "simulate: alpha = {:e}, final f_R = {:.6} over {} realizations, written to {}",
        params.alpha,
        traj.f_r_mean.last().copied().unwrap_or(0.0),
        run.realizations,
        out.path("simulate.csv").display()
    );
    Ok(())
}

pub fn sweep_spec(cfg: &RunConfig, seed: u64) -> Result<SweepSpec> {
    let model = cfg.model()?;
    let ensemble = cfg.ensemble()?;
    let sweep = section(&cfg.sweep, "sweep")?;
    let defaults = TimeGrid::default();
    let groups = sweep
        .group
        .iter()
        .map(|g| g.resolve(model))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSpec {
        dimension: model.dimension,
        interaction_exponent: model.interaction_exponent,
        atom_count: ensemble.atoms,
        realizations: ensemble.realizations,
        geometry: cfg.resolve_geometry()?,
        basis: cfg.resolve_basis()?,
        options: cfg.resolve_propagation(),
        time_grid: TimeGrid {
            span: sweep.span.unwrap_or(defaults.span),
            points: sweep.points.unwrap_or(defaults.points),
        },
        master_seed: seed,
        r_min: cfg.r_min(),
        interaction_coefficient: model.interaction_coefficient_si()?,
        groups,
        bootstrap_resamples: sweep.bootstrap,
    })
}

#[derive(Serialize)]
struct ExponentReport<'a> {
    theory: &'a str,
    fit: &'a PowerLawFit,
}

fn references(d: u32) -> Vec<serde_json::Value> {
    REFERENCE_EXPONENTS
        .iter()
        .filter(|r| r.dimension == d)
        .map(|r| json!(r))
        .collect()
}

fn print_fit(name: &str, theory: &str, fit: &PowerLawFit) {
    println!(
        "{name:<8} = {:.4} +/- {:.4}  (theory {theory}, {} points, r^2 = {:.4})",
        fit.exponent, fit.exponent_stderr, fit.point_count, fit.r_squared
    );
}

fn print_collapse(name: &str, c: &Option<CollapseReport>) {
    if let Some(c) = c {
        println!(
            "collapse of {name}: {} (rms log residual {:.4})",
            if c.collapsed { "yes" } else { "no" },
            c.rms_log_residual
        );
    }
}

pub fn sweep(ctx: &Context) -> Result<()> {
    let spec = sweep_spec(&ctx.config, ctx.seed)?;
    let result = run_sweep(&spec)?;
    let (d, p) = (spec.dimension, spec.interaction_exponent);
    let theory = critical_exponents(d, p)?;

    let mut pts = Table::new(&[
        "group",
        "index",
        "alpha",
        "g_r",
        "f_r",
        "rate",
        "rate_stderr",
        "saturation",
        "saturation_stderr",
        "saturation_unconstrained",
        "density",
        "rabi_frequency",
        "max_excitations",
        "max_norm_drift",
        "max_energy_drift",
        "max_top_sector_population",
    ]);
    pts.comment(format!(
        "sweep, d = {d}, p = {p}, atoms = {}, realizations = {}, master_seed = {}",
        spec.atom_count, spec.realizations, spec.master_seed
    ));
    pts.comment("units: rate and saturation in atoms per hbar/E_c and atoms; density m^-d; rabi_frequency rad/s");
    let mut traj = Table::new(&["group", "index", "alpha", "tau", "f_r_mean", "f_r_stderr"]);
    traj.comment("disorder-averaged trajectories of every sweep point; tau in hbar/E_c");
    for r in &result.points {
        let (density, omega) = match r.point {
            SweepPoint::Physical {
                density,
                rabi_frequency,
            } => (Some(density), Some(rabi_frequency)),
            SweepPoint::Alpha { .. } => (None, None),
        };
        pts.row(vec![
            r.group.clone(),
            r.index.to_string(),
            num(r.alpha),
            num(r.scaling.g_r),
            num(r.scaling.f_r),
            num(r.fit.rate),
            num(r.fit.rate_stderr),
            num(r.fit.saturation),
            num(r.fit.saturation_stderr),
            r.fit.saturation_unconstrained.to_string(),
            opt(density),
            opt(omega),
            r.max_excitations.to_string(),
            num(r.max_norm_drift),
            num(r.max_energy_drift),
            num(r.max_top_sector_population),
        ]);
        let tr = &r.trajectory;
        for i in 0..tr.times.len() {
            traj.row(vec![
                r.group.clone(),
                r.index.to_string(),
                num(r.alpha),
                num(tr.times[i]),
                num(tr.f_r_mean[i]),
                num(tr.f_r_stderr[i]),
            ]);
        }
    }

    let one_over_delta = theory.one_over_delta.to_string();
    let gamma = theory.gamma.to_string();
    let report = json!({
        "dimension": d,
        "interaction_exponent": p,
        "inverse_delta": ExponentReport { theory: &one_over_delta, fit: &result.inverse_delta },
        "gamma": ExponentReport { theory: &gamma, fit: &result.gamma },
        "collapse_fraction": result.collapse_fraction,
        "collapse_rate": result.collapse_rate,
        "bootstrap": result.bootstrap,
        "references": references(d),
        "points": result.points.iter().map(|r| json!({
            "group": r.group,
            "index": r.index,
            "point": r.point,
            "fit": r.fit,
            "scaling": r.scaling,
        })).collect::<Vec<_>>(),
    });

    let mut out = OutputDir::create(&ctx.out)?;
    out.table("sweep_points.csv", &pts)?;
    out.table("sweep_trajectories.csv", &traj)?;
    out.json("sweep_report.json", &report)?;
    out.write(
        "sweep.gp",
        gnuplot_stub(
            "sweep_points.csv",
            "rescaled rate and fraction",
            "alpha",
            "g_R, f_R",
            "xy",
            &[(3, 4, "g_R"), (3, 5, "f_R")],
        )
        .as_bytes(),
    )?;
    out.manifest("sweep", &ctx.effective_config(), json!({ "spec": spec }))?;

    print_fit("1/delta", &one_over_delta, &result.inverse_delta);
    print_fit("gamma", &gamma, &result.gamma);
    print_collapse("f_R", &result.collapse_fraction);
    print_collapse("g_R", &result.collapse_rate);
    Ok(())
}

#[derive(Serialize)]
struct FittedRun {
    run_id: String,
    group: String,
    fit: SaturationFit,
    scaling: ScalingPoint,
}

fn group_key(run: &ExternalRun, by: GroupBy) -> String {
    match by {
        GroupBy::Density => format!("n={:e}", run.density),
        GroupBy::RabiFrequency => format!("omega={:e}", run.rabi_frequency),
        GroupBy::AtomNumber => format!("N={:e}", run.atom_number),
    }
}

pub fn collapse(ctx: &Context) -> Result<()> {
    let model = ctx.config.model()?;
    let section = section(&ctx.config.collapse, "collapse")?;
    let (d, p) = (model.dimension, model.interaction_exponent);
    let coefficient = model
        .interaction_coefficient_si()?
        .ok_or_else(|| config_err("collapse needs model.interaction_coefficient"))?;
    let path = ctx.base.join(&section.data);
    let runs = read_external_runs(BufReader::new(File::open(&path)?), d)?;
    if runs.is_empty() {
        return Err(config_err(format!("{} holds no runs", path.display())));
    }
    let context = RescaleContext::Physical {
        interaction_coefficient: coefficient,
        dimension: d,
        interaction_exponent: p,
    };

    let mut fitted = Vec::with_capacity(runs.len());
    for run in &runs {
        let fit = fit_saturation(
            &run.times,
            &run.counts,
            half_rise_guess(&run.times, &run.counts),
        )?;
        let record = RunRecord::Physical {
            density: run.density,
            rabi_frequency: run.rabi_frequency,
            atom_number: run.atom_number,
            rate: fit.rate,
            saturation: fit.saturation,
        };
        let scaling = rescale(&run.id(), &record, &context)?;
        fitted.push(FittedRun {
            run_id: run.id(),
            group: group_key(run, section.group_by),
            fit,
            scaling,
        });
    }

    let mut labels: Vec<String> = Vec::new();
    for f in &fitted {
        if !labels.contains(&f.group) {
            labels.push(f.group.clone());
        }
    }
    let inverse_delta = fit_powerlaw(
        &fitted
            .iter()
            .map(|f| (f.scaling.alpha, f.scaling.f_r))
            .collect::<Vec<_>>(),
    )?;
    let gamma_fit = fit_powerlaw(
        &fitted
            .iter()
            .map(|f| (f.scaling.alpha, f.scaling.g_r))
            .collect::<Vec<_>>(),
    )?;
    let collapse_for = |pick: fn(&ScalingPoint) -> f64| -> Result<Option<CollapseReport>> {
        if labels.len() < 2 {
            return Ok(None);
        }
        let groups: Vec<CollapseGroup> = labels
            .iter()
            .map(|l| CollapseGroup {
                label: l.clone(),
                points: fitted
                    .iter()
                    .filter(|f| &f.group == l)
                    .map(|f| (f.scaling.alpha, pick(&f.scaling)))
                    .collect(),
            })
            .collect();
        collapse_quality(&groups).map(Some)
    };
    let collapse_fraction = collapse_for(|s| s.f_r)?;
    let collapse_rate = collapse_for(|s| s.g_r)?;

    let mut t = Table::new(&[
        "run_id",
        "group",
        "density",
        "rabi_frequency",
        "alpha",
        "g_r",
        "f_r",
        "rate",
        "rate_stderr",
        "saturation",
        "saturation_stderr",
    ]);
    t.comment(format!("external data {}, d = {d}, p = {p}", section.data));
    t.comment("units: density m^-d; rabi_frequency rad/s; rate 1/s; alpha, g_r, f_r dimensionless");
    for f in &fitted {
        t.row(vec![
            f.run_id.clone(),
            f.group.clone(),
            opt(f.scaling.provenance.density),
            opt(f.scaling.provenance.rabi_frequency),
            num(f.scaling.alpha),
            num(f.scaling.g_r),
            num(f.scaling.f_r),
            num(f.fit.rate),
            num(f.fit.rate_stderr),
            num(f.fit.saturation),
            num(f.fit.saturation_stderr),
        ]);
    }
    let theory = critical_exponents(d, p)?;
    let one_over_delta = theory.one_over_delta.to_string();
    let gamma = theory.gamma.to_string();
    let report = json!({
        "dimension": d,
        "interaction_exponent": p,
        "inverse_delta": ExponentReport { theory: &one_over_delta, fit: &inverse_delta },
        "gamma": ExponentReport { theory: &gamma, fit: &gamma_fit },
        "collapse_fraction": collapse_fraction,
        "collapse_rate": collapse_rate,
        "references": references(d),
        "runs": fitted,
    });

    let mut out = OutputDir::create(&ctx.out)?;
    out.table("collapse_points.csv", &t)?;
    out.json("collapse_report.json", &report)?;
    out.write(
        "collapse.gp",
        gnuplot_stub(
            "collapse_points.csv",
            "data collapse",
            "alpha",
            "g_R, f_R",
            "xy",
            &[(5, 6, "g_R"), (5, 7, "f_R")],
        )
        .as_bytes(),
    )?;
    out.manifest(
        "collapse",
        &ctx.effective_config(),
        json!({ "interaction_coefficient": coefficient, "runs": runs.len(), "groups": labels }),
    )?;

    print_fit("1/delta", &one_over_delta, &inverse_delta);
    print_fit("gamma", &gamma, &gamma_fit);
    print_collapse("f_R", &collapse_fraction);
    print_collapse("g_R", &collapse_rate);
    Ok(())
}

pub fn lda(ctx: &Context) -> Result<()> {
    let model = ctx.config.model()?;
    let section = section(&ctx.config.lda, "lda")?;
    let (d, p) = (model.dimension, model.interaction_exponent);
    let sigmas = section
        .sigmas
        .iter()
        .map(|s| {
            parse_quantity(s, Quantity::Length).map_err(|e| config_err(format!("lda.sigmas: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let cloud = CloudSpec::new(sigmas, section.atom_number)?;
    let law = match section.law {
        LawKind::PowerLaw => {
            if section.delta_peak.is_some() {
                return Err(config_err("lda.delta_peak needs law = \"mean_field\""));
            }
            LocalLaw::PowerLaw
        }
        LawKind::MeanField => LocalLaw::MeanField {
            delta_peak: section.delta_peak.unwrap_or(0.0),
        },
    };

    let alphas = match (&section.alpha_peak, model.alpha) {
        (Some(_), Some(_)) => {
            return Err(config_err("give lda.alpha_peak or model.alpha, not both"))
        }
        (Some(list), None) => list.clone(),
        (None, Some(a)) => vec![a],
        (None, None) => {
            // Coupling at the peak density the analysis sees.
            let peak = if cloud.dimension() != d as usize && d == 1 {
                effective_line_density(&cloud)?.peak
            } else {
                cloud.peak_density()
            };
            let rabi = model.rabi_frequency.as_deref().ok_or_else(|| {
                config_err("lda needs lda.alpha_peak, model.alpha or model.rabi_frequency")
            })?;
            let phys = PhysicalParams {
                rabi_frequency: parse_quantity(rabi, Quantity::AngularFrequency)
                    .map_err(|e| config_err(format!("model.rabi_frequency: {e}")))?,
                laser_detuning: 0.0,
                density: peak,
                interaction_coefficient: model.interaction_coefficient_si()?.ok_or_else(|| {
                    config_err("lda needs model.interaction_coefficient with a Rabi frequency")
                })?,
                dimension: d,
                interaction_exponent: p,
                atom_number: section.atom_number.round().max(1.0) as u64,
            };
            vec![nondimensionalize(&phys)?.alpha]
        }
    };
    if alphas.is_empty() {
        return Err(config_err("lda.alpha_peak is empty"));
    }

    let mut results = Vec::with_capacity(alphas.len());
    for &a in &alphas {
        results.push(lda_average_with(&cloud, a, d, p, law)?);
    }
    let mut t = Table::new(&[
        "alpha_peak",
        "f_r",
        "prefactor",
        "closed_form",
        "quadrature_error",
        "blockade_exceeds_cloud",
        "xi_m",
    ]);
    t.comment(format!(
        "local density average, d = {d}, p = {p}, cloud axes = {}",
        cloud.dimension()
    ));
    t.comment("units: xi_m in metres; everything else dimensionless");
    for r in &results {
        let xi = r.warnings.iter().find_map(|w| match w {
            LdaWarning::BlockadeExceedsCloud { xi_m, .. } => Some(*xi_m),
        });
        t.row(vec![
            num(r.alpha_peak),
            num(r.f_r),
            num(r.prefactor),
            opt(r.closed_form),
            num(r.quadrature_error),
            xi.is_some().to_string(),
            opt(xi),
        ]);
    }
    let cloud_exponent = if results.len() >= 3 {
        Some(fit_powerlaw(
            &results
                .iter()
                .map(|r| (r.alpha_peak, r.f_r))
                .collect::<Vec<_>>(),
        )?)
    } else {
        None
    };

    let mut out = OutputDir::create(&ctx.out)?;
    out.table("lda.csv", &t)?;
    out.json(
        "lda_report.json",
        &json!({ "cloud": cloud, "law": law, "results": results, "cloud_exponent": cloud_exponent }),
    )?;
    out.write(
        "lda.gp",
        gnuplot_stub(
            "lda.csv",
            "cloud-averaged fraction",
            "alpha_peak",
            "f_R",
            "xy",
            &[(1, 2, "f_R")],
        )
        .as_bytes(),
    )?;
    out.manifest(
        "lda",
        &ctx.effective_config(),
        json!({ "cloud": cloud, "alpha_peak": alphas }),
    )?;
    for r in &results {
        println!(
            "lda: alpha_peak = {:e}, f_R = {:.6e}, prefactor = {:.6}{}",
            r.alpha_peak,
            r.f_r,
            r.prefactor,
            if r.warnings.is_empty() {
                ""
            } else {
                " (blockade radius exceeds cloud)"
            }
        );
    }
    if let Some(f) = cloud_exponent {
        println!(
            "cloud exponent = {:.6} +/- {:.2e}",
            f.exponent, f.exponent_stderr
        );
    }
    Ok(())
}
