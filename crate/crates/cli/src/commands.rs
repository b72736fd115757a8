use critmode::design::*;
use critmode::dynamics::{check_sum_rules, cluster_cancellation_experiment, rk4_trajectory, trajectory};
use critmode::jordan::{compute_spectrum, JordanBlock, Spectrum};
use critmode::linalg::loglog_fit;
use critmode::model::{OscillatorSystem, SystemFile};
use critmode::perturbation::*;
use critmode::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::*;
use crate::config::*;
use crate::output::*;

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn component_names(n: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(4 * n);
    for kind in ["x", "p"] {
        for i in 1..=n {
            names.push(format!("{kind}{i}_re"));
            names.push(format!("{kind}{i}_im"));
        }
    }
    names
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let common = &args.common;
    let tol = tolerances(common)?;
    let source = load_system(common)?;
    let spectrum = compute_spectrum(source.system(), &tol)?;
    let report = spectrum.verify();
    let rules = check_sum_rules(&spectrum);

    let mut checks: Vec<(String, f64)> = vec![
        ("chain_relation".into(), report.chain_residual),
        ("bilinear_pairing".into(), report.pairing_defect),
        ("biorthogonality".into(), report.biorthogonality_defect),
        ("completeness".into(), report.completeness_defect),
        ("cross_block_pairing".into(), report.cross_block_pairing),
        ("representation_shape".into(), report.max_shape_deviation()),
    ];
    for (i, v) in rules.max_abs.iter().enumerate() {
        checks.push((format!("sum_rule_{}", i + 1), *v));
    }
    let limit = tol.residual_tol;

    write_json(&out_path(&common.out, "spectrum.json")?, &spectrum.to_export())?;
    match common.format {
        Format::Json => {
            let checks_json: Vec<Value> = checks
                .iter()
                .map(|(name, v)| json!({"check": name, "residual": v, "tolerance": limit, "pass": *v <= limit}))
                .collect();
            write_json(
                &out_path(&common.out, "verification.json")?,
                &json!({"checks": checks_json, "blocks": report.blocks}),
            )?;
        }
        Format::Csv => {
            let mut t = Table::new(&["check", "residual", "tolerance", "pass"]);
            for (name, v) in &checks {
                t.push(vec![name.clone(), num(*v), num(limit), (*v <= limit).to_string()]);
            }
            t.write(&out_path(&common.out, "verification.csv")?)?;
            let mut b = Table::new(&["label", "omega_re", "omega_im", "size"]);
            for blk in spectrum.blocks() {
                let [re, im] = cnum(blk.omega);
                b.push(vec![blk.label.to_string(), re, im, blk.size().to_string()]);
            }
            b.write(&out_path(&common.out, "blocks.csv")?)?;
        }
    }

    for blk in spectrum.blocks() {
        println!("block {:>3}  omega = {:+.12} {:+.12}i  M = {}", blk.label, blk.omega.re, blk.omega.im, blk.size());
    }
    let failed: Vec<_> = checks.iter().filter(|(_, v)| *v > limit).collect();
    for (name, v) in &checks {
        println!("{name:<22} {v:.3e}");
    }
    if failed.is_empty() {
        Ok(())
    } else {
        let dump: Vec<String> = failed.iter().map(|(n, v)| format!("{n} = {v:.3e}")).collect();
        Err(CliError::Failed(format!("checks above {limit:e}: {}", dump.join(", "))))
    }
}

fn time_grid(args: &EvolveArgs) -> CliResult<Vec<f64>> {
    let times = match &args.times {
        Some(t) => t.clone(),
        None => {
            if args.t_steps == 0 {
                return Err(config_err("--t-steps must be positive"));
            }
            (0..=args.t_steps).map(|k| args.t_max * k as f64 / args.t_steps as f64).collect()
        }
    };
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(config_err("time grid must be nonempty and finite"));
    }
    Ok(times)
}

pub fn evolve(args: &EvolveArgs) -> CliResult<()> {
    let common = &args.common;
    let tol = tolerances(common)?;
    let source = load_system(common)?;
    let sys = source.system();
    let phi = state_vector(args.phi.as_deref(), sys.dim())?;
    let times = time_grid(args)?;
    let spectrum = compute_spectrum(sys, &tol)?;
    let traj = trajectory(&spectrum, &phi, &times)?;
    let oracle = if args.oracle {
        if times.iter().any(|t| *t < 0.0) {
            return Err(config_err("the Runge-Kutta comparison needs nonnegative times"));
        }
        Some(rk4_trajectory(sys, &phi, &times, args.rk_step))
    } else {
        None
    };
    let deviations: Vec<f64> = match &oracle {
        Some(rk) => traj
            .states
            .iter()
            .zip(rk)
            .map(|(a, b)| (a - b).norm() / b.norm().max(f64::MIN_POSITIVE))
            .collect(),
        None => Vec::new(),
    };

    match common.format {
        Format::Csv => {
            let names = component_names(sys.n());
            let mut header = vec!["t".to_string()];
            header.extend(names.iter().cloned());
            if oracle.is_some() {
                header.extend(names.iter().map(|n| format!("rk_{n}")));
                header.push("relative_deviation".into());
            }
            let mut t = Table::new(&header);
            for (i, time) in times.iter().enumerate() {
                let mut row = vec![num(*time)];
                row.extend(traj.states[i].iter().flat_map(|z| cnum(*z)));
                if let Some(rk) = &oracle {
                    row.extend(rk[i].iter().flat_map(|z| cnum(*z)));
                    row.push(num(deviations[i]));
                }
                t.push(row);
            }
            t.write(&out_path(&common.out, "trajectory.csv")?)?;
        }
        Format::Json => {
            let states = |v: &[critmode::model::PhaseVector]| -> Vec<Vec<Value>> {
                v.iter().map(|s| s.iter().map(|z| pair(*z)).collect()).collect()
            };
            let mut doc = json!({"times": times, "states": states(&traj.states)});
            if let Some(rk) = &oracle {
                doc["oracle_states"] = json!(states(rk));
                doc["relative_deviation"] = json!(deviations);
            }
            write_json(&out_path(&common.out, "trajectory.json")?, &doc)?;
        }
    }
    println!("{} samples", times.len());
    if !deviations.is_empty() {
        println!("max relative deviation from Runge-Kutta: {:.3e}", deviations.iter().cloned().fold(0.0, f64::max));
    }
    Ok(())
}

fn critical_block<'a>(spectrum: &'a Spectrum, omega: Option<&[f64]>) -> CliResult<&'a JordanBlock> {
    let block = match omega {
        Some([re, im]) => spectrum
            .block_near(Complex64::new(*re, *im))
            .ok_or_else(|| config_err(format!("no eigenvalue near {re}{im:+}i")))?,
        Some(_) => return Err(config_err("--omega takes two numbers: re,im")),
        None => spectrum.largest_block(),
    };
    if block.is_trivial() {
        return Err(config_err(format!("the eigenvalue at {} is not defective", block.omega)));
    }
    Ok(block)
}

fn eps_grid(grid: &EpsGrid) -> CliResult<Vec<f64>> {
    let eps0 = grid.eps0.unwrap_or(1e-4);
    let power = grid.eps_power.unwrap_or(2);
    let count = grid.eps_count.unwrap_or(9);
    if count == 0 || eps0 == 0.0 || !eps0.is_finite() {
        return Err(config_err("eps grid needs a nonzero eps0 and a positive count"));
    }
    Ok((0..count).map(|n| (n as f64).powi(power as i32) * eps0).collect())
}

fn sweep_table<'a>(rows: impl Iterator<Item = (Option<f64>, &'a SweepRow)>, with_panel: bool) -> Table {
    let mut header: Vec<&str> = Vec::new();
    if with_panel {
        header.push("eps0");
    }
    header.extend([
        "epsilon",
        "k",
        "numerical_re",
        "numerical_im",
        "predicted_re",
        "predicted_im",
        "abs_error",
    ]);
    let mut t = Table::new(&header);
    for (panel, r) in rows {
        let mut row = Vec::new();
        if let Some(e0) = panel {
            row.push(num(e0));
        }
        row.push(num(r.epsilon));
        row.push(r.k.to_string());
        row.extend(cnum(r.numerical));
        row.extend(cnum(r.predicted));
        row.push(num(r.abs_error));
        t.push(row);
    }
    t
}

pub fn perturb(args: &PerturbArgs) -> CliResult<()> {
    let common = &args.common;
    let tol = tolerances(common)?;
    let source = load_system(common)?;
    let dk = perturbation_matrix(&source, args.dk.as_deref(), args.perturbation.as_deref())?;
    let spectrum = compute_spectrum(source.system(), &tol)?;
    let sys = spectrum.system();
    let block = critical_block(&spectrum, args.omega.as_deref())?;
    let grid = eps_grid(&args.grid)?;
    let m = block.size();

    let xi = xi_generic(sys, block, &dk)?;
    let generic = match predict_splitting(sys, block, &dk, 1.0) {
        Ok(_) => true,
        Err(Error::NonGeneric { .. }) => false,
        Err(e) => return Err(e.into()),
    };
    let mut summary = json!({
        "omega": pair(block.omega),
        "block_size": m,
        "xi": pair(xi),
        "generic": generic,
    });

    let (rows, groups) = if generic {
        let second = args.second_order;
        let rows = sweep_rows(sys, block, &dk, &grid, |eps| {
            if eps == 0.0 {
                Ok(vec![Complex64::new(0.0, 0.0); m])
            } else if second {
                second_order_prediction(sys, block, &dk, eps)
            } else {
                Ok(predict_splitting(sys, block, &dk, eps)?.shifts)
            }
        })?;
        (rows, vec![m])
    } else {
        if args.second_order {
            return Err(config_err("second-order predictions need a generic perturbation"));
        }
        let ng = xi_nongeneric(sys, block, &dk)?;
        summary["xi_prime"] = pair(ng.xi_prime);
        let rows = sweep_rows(sys, block, &dk, &grid, |eps| Ok(ng.shifts(eps)))?;
        (rows, vec![1, m - 1])
    };
    let fit_grid = decade_grid(grid.iter().find(|e| **e != 0.0).map_or(1.0, |e| e.signum()));
    let fits = fit_exponents_by_rank(sys, block, &dk, &fit_grid, &groups)?;
    summary["fits"] = json!(groups
        .iter()
        .zip(&fits)
        .map(|(g, (slope, residual))| json!({"group_size": g, "exponent": slope, "residual": residual}))
        .collect::<Vec<_>>());

    match common.format {
        Format::Csv => sweep_table(rows.iter().map(|r| (None, r)), false).write(&out_path(&common.out, "sweep.csv")?)?,
        Format::Json => {
            summary["rows"] = json!(rows
                .iter()
                .map(|r| json!({"epsilon": r.epsilon, "k": r.k, "numerical": pair(r.numerical),
                    "predicted": pair(r.predicted), "abs_error": r.abs_error}))
                .collect::<Vec<_>>());
        }
    }
    write_json(&out_path(&common.out, "perturbation.json")?, &summary)?;

    println!("block at {:+.12} {:+.12}i, M = {m}", block.omega.re, block.omega.im);
    println!("xi = {:+.12} {:+.12}i ({})", xi.re, xi.im, if generic { "generic" } else { "non-generic" });
    for (g, (slope, _)) in groups.iter().zip(&fits) {
        println!("group of {g}: splitting exponent {slope:.4}");
    }
    Ok(())
}

fn need(v: Option<f64>, flag: &str) -> CliResult<f64> {
    v.ok_or_else(|| config_err(format!("--{flag} is required for this family")))
}

pub fn design(args: &DesignArgs) -> CliResult<()> {
    let common = &args.common;
    let (sys, roots): (OscillatorSystem, Option<Vec<Complex64>>) = match args.family {
        Family::Quartic => (
            quartic_critical_branch(need(args.x, "x")?, need(args.y, "y")?, !args.lower_branch)?,
            Some(quartic_roots()),
        ),
        Family::Cubic => {
            let b = need(args.b, "b")?;
            (cubic_critical(b, need(args.gamma11, "gamma11")?)?, Some(cubic_roots(b)))
        }
        Family::Double2 => {
            let b = need(args.b, "b")?;
            (double2_critical(b)?, Some(double2_roots(b)))
        }
        Family::Scale => {
            let source = load_system(common)?;
            (scale_system(source.system(), need(args.a, "a")?)?, None)
        }
    };
    write_json(&out_path(&common.out, "system.json")?, &SystemFile::from_system(&sys))?;
    for w in sys.warnings() {
        println!("warning: {w}");
    }
    if let Some(roots) = roots {
        let defect = char_poly_defect(&sys, &roots);
        println!("characteristic polynomial defect {defect:.3e}");
        if defect > 1e-10 {
            return Err(CliError::Failed(format!("design misses its target by {defect:.3e}")));
        }
    }
    Ok(())
}

pub fn reproduce(args: &FigureArgs) -> CliResult<()> {
    let common = &args.common;
    let tol = tolerances(common)?;
    let eps0 = args.eps0.clone().unwrap_or_else(|| vec![1e-4, -1e-4]);
    if let Some(p) = args.eps_power {
        if !(2..=4).contains(&p) {
            return Err(config_err("--eps-power must be 2, 3 or 4"));
        }
    }
    let data = reproduce_figure(args.figure, &eps0, args.eps_count, args.eps_power, &tol)?;
    let id = data.id;
    match common.format {
        Format::Json => write_json(&out_path(&common.out, &format!("figure{id}.json"))?, &data)?,
        Format::Csv => {
            let rows = data.panels.iter().flat_map(|p| p.rows.iter().map(move |r| (Some(p.eps0), r)));
            let t = sweep_table(rows, true);
            t.write(&out_path(&common.out, &format!("figure{id}.csv"))?)?;
            let panels: Vec<Value> = data
                .panels
                .iter()
                .map(|p| {
                    json!({
                        "eps0": p.eps0,
                        "omega": pair(p.omega),
                        "fits": p.fits,
                        "equiangular_defect": p.equiangular_defect,
                        "equiangular_bound": p.equiangular_bound,
                        "error_slope": p.error_slope,
                        "spacing_defect": p.spacing_defect,
                    })
                })
                .collect();
            write_json(
                &out_path(&common.out, &format!("figure{id}_summary.json"))?,
                &json!({"figure": id, "system": data.system, "perturbation": data.perturbation,
                    "power": data.power, "panels": panels}),
            )?;
        }
    }
    for p in &data.panels {
        let fits: Vec<String> = p.fits.iter().map(|f| format!("{:.4} (expected {:.4})", f.exponent, f.expected)).collect();
        println!("figure {id} eps0 = {:e}: exponents {}", p.eps0, fits.join(", "));
    }
    Ok(())
}

pub fn cancellation(args: &CancellationArgs) -> CliResult<()> {
    let common = &args.common;
    let tol = tolerances(common)?;
    let source = load_system(common)?;
    let dk: DMatrix<f64> = perturbation_matrix(&source, None, Some(&args.perturbation))?;
    let spectrum = compute_spectrum(source.system(), &tol)?;
    let phi = state_vector(args.phi.as_deref(), source.system().dim())?;
    if !(args.eps_min > 0.0 && args.eps_max > args.eps_min && args.eps_count >= 2) {
        return Err(config_err("need 0 < eps-min < eps-max and at least two points"));
    }
    let (lo, hi) = (args.eps_min.log10(), args.eps_max.log10());
    let grid: Vec<f64> = (0..args.eps_count)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (args.eps_count - 1) as f64))
        .collect();
    let reports = grid
        .iter()
        .map(|eps| cluster_cancellation_experiment(&spectrum, &dk, *eps, &phi, &args.times))
        .collect::<Result<Vec<_>, _>>()?;

    let lambda: Vec<f64> = reports.iter().map(|r| r.lambda_measured).collect();
    let weights: Vec<f64> = reports.iter().map(|r| r.max_weight).collect();
    let diffs: Vec<f64> = reports.iter().map(|r| r.max_difference).collect();
    let (weight_slope, _) = loglog_fit(&lambda, &weights)?;
    // a difference at roundoff level carries no slope information
    let diff_slope = if diffs.iter().all(|d| *d > 0.0) {
        Some(loglog_fit(&lambda, &diffs)?.0)
    } else {
        None
    };

    match common.format {
        Format::Csv => {
            let mut t = Table::new(&["epsilon", "lambda", "mode", "weight"]);
            for r in &reports {
                for (k, w) in r.per_mode_weights.iter().enumerate() {
                    t.push(vec![num(r.epsilon), num(r.lambda_measured), k.to_string(), num(*w)]);
                }
            }
            t.write(&out_path(&common.out, "cancellation_modes.csv")?)?;
            let mut t = Table::new(&["epsilon", "lambda_predicted", "lambda", "max_weight", "max_difference"]);
            for r in &reports {
                t.push(vec![
                    num(r.epsilon),
                    num(r.lambda_predicted),
                    num(r.lambda_measured),
                    num(r.max_weight),
                    num(r.max_difference),
                ]);
            }
            t.write(&out_path(&common.out, "cancellation.csv")?)?;
        }
        Format::Json => write_json(&out_path(&common.out, "cancellation.json")?, &reports)?,
    }
    write_json(
        &out_path(&common.out, "cancellation_summary.json")?,
        &json!({"weight_slope": weight_slope, "difference_slope": diff_slope}),
    )?;
    println!("per-mode weight vs lambda slope {weight_slope:.4}");
    match diff_slope {
        Some(s) => println!("cluster-sum difference vs lambda slope {s:.4}"),
        None => println!("cluster-sum difference vanishes to roundoff"),
    }
    Ok(())
}
