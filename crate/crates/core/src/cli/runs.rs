//! Experiment runners. Each returns a result table; rows with status
//! `fail` are check failures.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{DensityKind, ExperimentConfig, ExperimentKind, StudyKind};
use super::output::{write_columns, ResultRow, ResultTable};
use crate::epstein::{
    epstein_zeta, epstein_zeta_truncated, truncation_radius, wigner_limit_oracle,
    ComplexQuadraticForm,
};
use crate::error::{Error, Result};
use crate::helmholtz::{
    assemble_combined_field, bump_density, cylinder_density, evaluate_with_nodes, exact_field,
    layer_potential_at, point_source_data, solve_dirichlet, GmresOptions, KernelSpec, SolverKind,
};
use crate::quadrature::{
    convergence_slope, corrected_trapezoid, punctured_trapezoid, DomainKind, GridSpec,
};
use crate::special::gamma;
use crate::surfaces::{builtin, SurfaceChart};
use crate::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dispatches on the experiment kind.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultTable> {
    match cfg.kind {
        ExperimentKind::ZetaSelftest => run_zeta_selftest(cfg),
        ExperimentKind::Convergence => run_convergence(cfg),
        ExperimentKind::HalfspaceSolve => run_halfspace_solve(cfg),
    }
}

// Cohen–Villegas–Zagier acceleration of Σ_{k≥0} (−1)^k a_k.
fn alternating(a: impl Fn(usize) -> f64) -> f64 {
    let n = 60usize;
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let (mut b, mut cc, mut s) = (-1.0, -d, 0.0);
    for k in 0..n {
        cc = b - cc;
        s += cc * a(k);
        b = (k as f64 + n as f64) * (k as f64 - n as f64) * b / ((k as f64 + 0.5) * (k as f64 + 1.0));
    }
    s / d
}

/// `4 ζ(s) β(s)` from alternating Dirichlet series.
pub fn zeta_beta_product(s: f64) -> f64 {
    let eta = alternating(|k| ((k + 1) as f64).powf(-s));
    let zeta = eta / (1.0 - 2f64.powf(1.0 - s));
    let beta = alternating(|k| ((2 * k + 1) as f64).powf(-s));
    4.0 * zeta * beta
}

/// Deterministic pseudo-random forms with `Re A` positive definite.
pub fn sample_forms(n: usize, seed: u64) -> Vec<ComplexQuadraticForm> {
    let mut state = seed;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64)
    };
    let mut out = Vec::new();
    while out.len() < n {
        let e = c(0.5 + 2.0 * next(), 1.2 * (next() - 0.5));
        let g = c(0.5 + 2.0 * next(), 1.2 * (next() - 0.5));
        let f = c(0.8 * (next() - 0.5), 0.8 * (next() - 0.5));
        if let Ok(a) = ComplexQuadraticForm::new(e, f, g) {
            if a.flags().is_direct() {
                out.push(a);
            }
        }
    }
    out
}

fn form_label(a: &ComplexQuadraticForm) -> String {
    format!("E={};F={};G={}", a.e(), a.f(), a.g())
}

fn relative(value: C64, reference: C64) -> f64 {
    (value - reference).norm() / reference.norm().max(f64::MIN_POSITIVE)
}

/// Zeta self-test: the identity-form product formula, the functional
/// equation, scaling, the residue at `s = 1`, `Z(0) = −1`, the truncation
/// bound and agreement with the Wigner limit.
pub fn run_zeta_selftest(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let z = &cfg.zeta;
    let id = cfg.id.as_str();
    let eps = z.eps;
    let tol = (100.0 * eps).max(1e-10);
    let mut forms = Vec::new();
    for (i, &(e, f, g)) in z.forms.iter().enumerate() {
        let a = ComplexQuadraticForm::new(e, f, g)
            .map_err(|err| Error::Config(format!("zeta.forms[{i}]: {err}")))?;
        if !z.wigner_s.is_empty() && !a.flags().re_pd {
            return Err(Error::Config(format!(
                "zeta.forms[{i}]: Re(A) is not positive definite, which the Wigner check requires"
            )));
        }
        forms.push(a);
    }
    let random = sample_forms(z.random_forms, z.seed);
    let mut table = ResultTable::default();

    let identity = ComplexQuadraticForm::identity();
    for &s in &z.identity_s {
        let t0 = Instant::now();
        let got = epstein_zeta(&identity, c(s, 0.0), eps)?.value;
        let want = c(zeta_beta_product(s), 0.0);
        let row = ResultRow::new(id, format!("check=identity;s={s};eps={eps:e}"), got, want);
        let ok = row.rel_error <= tol;
        table.push(row.check(ok).timed(t0.elapsed().as_secs_f64()));
    }

    let lambda = |a: &ComplexQuadraticForm, s: C64| -> Result<C64> {
        let zv = epstein_zeta(a, s, eps)?.value;
        Ok((-s * PI.ln()).exp() * gamma(s)? * zv)
    };
    for a in random.iter().chain(&forms) {
        let inv = a.inverse()?;
        for &s in &z.functional_s {
            let t0 = Instant::now();
            let lhs = lambda(a, s)?;
            let rhs = lambda(&inv, 1.0 - s)? / a.sqrt_det();
            let row = ResultRow::new(id, format!("check=functional;s={s};{}", form_label(a)), lhs, rhs);
            let ok = row.rel_error <= tol;
            table.push(row.check(ok).timed(t0.elapsed().as_secs_f64()));
        }
    }

    for a in &forms {
        for s in [c(0.5, 0.0), c(0.3, 0.2), c(2.0, 0.0)] {
            let t0 = Instant::now();
            let base = epstein_zeta(a, s, eps)?.value;
            let k = 2.5f64;
            let got = epstein_zeta(&a.scaled(c(k, 0.0))?, s, eps)?.value;
            let want = base * (-s * k.ln()).exp();
            let row = ResultRow::new(id, format!("check=scaling;c={k};s={s};{}", form_label(a)), got, want);
            let ok = (got - want).norm() <= tol * want.norm().max(1.0);
            table.push(row.check(ok).timed(t0.elapsed().as_secs_f64()));
        }
    }

    for a in random.iter().take(5).chain(&forms) {
        let t0 = Instant::now();
        let zero = epstein_zeta(a, c(0.0, 0.0), eps)?.value;
        let row = ResultRow::new(id, format!("check=value_at_zero;{}", form_label(a)), zero, c(-1.0, 0.0));
        let ok = row.abs_error <= (100.0 * eps).max(1e-12);
        table.push(row.check(ok).timed(t0.elapsed().as_secs_f64()));

        let t0 = Instant::now();
        let mut vals = Vec::new();
        for k in [5, 6] {
            let d = 10f64.powi(-k);
            vals.push(epstein_zeta(a, c(1.0 + d, 0.0), eps)?.value * d);
        }
        let extrap = (vals[1] * 10.0 - vals[0]) / 9.0;
        let want = PI / a.sqrt_det();
        let row = ResultRow::new(id, format!("check=residue;{}", form_label(a)), extrap, want);
        let ok = row.abs_error <= 1e-8;
        table.push(row.check(ok).timed(t0.elapsed().as_secs_f64()));
    }

    for a in &forms {
        for s in [c(0.5, 0.0), c(2.0, 0.0)] {
            let t0 = Instant::now();
            let rho = truncation_radius(a, s, eps)?;
            let z0 = epstein_zeta_truncated(a, s, rho)?;
            let z1 = epstein_zeta_truncated(a, s, rho + 2.0)?;
            let row = ResultRow::new(id, format!("check=truncation;rho={rho};s={s};{}", form_label(a)), z0, z1);
            let ok = row.abs_error < eps;
            table.push(row.check(ok).timed(t0.elapsed().as_secs_f64()));
        }
    }

    for a in &forms {
        for &s in &z.wigner_s {
            let s = c(s, 0.0);
            let zv = epstein_zeta(a, s, eps)?.value;
            let mut prev = f64::INFINITY;
            let last = z.wigner_n.len().saturating_sub(1);
            for (i, &n) in z.wigner_n.iter().enumerate() {
                let t0 = Instant::now();
                let w = wigner_limit_oracle(a, s, n)?;
                let row = ResultRow::new(id, format!("check=wigner;N={n};s={s};{}", form_label(a)), w, zv);
                let mut ok = row.abs_error < prev;
                if i == last {
                    ok &= row.abs_error <= z.wigner_tol;
                }
                prev = row.abs_error;
                table.push(row.check(ok).timed(t0.elapsed().as_secs_f64()));
            }
        }
    }
    Ok(table)
}

/// One row comparing `W_A^{(N)}(s)` with `Z_A(s)`.
pub fn run_wigner(form: (C64, C64, C64), s: C64, n: usize) -> Result<ResultTable> {
    let a = ComplexQuadraticForm::new(form.0, form.1, form.2)?;
    let t0 = Instant::now();
    let zv = epstein_zeta(&a, s, 1e-14)?.value;
    let w = wigner_limit_oracle(&a, s, n)?;
    let mut table = ResultTable::default();
    table.push(
        ResultRow::new("wigner", format!("N={n};s={s};{}", form_label(&a)), w, zv)
            .timed(t0.elapsed().as_secs_f64()),
    );
    Ok(table)
}

/// Grid whose node `(0, 0)` sits at `target`, covering `|v| ≤ half_width`
/// (stretched to reach the target if needed)
/// on the plane, or the band `|v₂| ≤ half_width` on a cylinder with about
/// `2π/h` nodes per period.
pub fn study_grid(chart: &dyn SurfaceChart, h: f64, target: (f64, f64), half_width: f64) -> Result<GridSpec> {
    match chart.kind() {
        DomainKind::Cylinder => {
            let n = (2.0 * PI / h).round().max(2.0) as usize;
            let h1 = 2.0 * PI / n as f64;
            let lo = (((-half_width - target.1) / h1).floor() as i64).min(0);
            let hi = (((half_width - target.1) / h1).ceil() as i64).max(0);
            GridSpec::cylinder(n, h1, target, lo, hi)
        }
        DomainKind::Plane => {
            let lo = (
                (((-half_width - target.0) / h).floor() as i64).min(0),
                (((-half_width - target.1) / h).floor() as i64).min(0),
            );
            let hi = (
                (((half_width - target.0) / h).ceil() as i64).max(0),
                (((half_width - target.1) / h).ceil() as i64).max(0),
            );
            GridSpec::plane_box(h, h, target, lo, hi)
        }
    }
}

fn study_density(cfg: &ExperimentConfig, chart: &dyn SurfaceChart) -> fn(f64, f64) -> C64 {
    fn zero(_: f64, _: f64) -> C64 {
        C64::new(0.0, 0.0)
    }
    match (cfg.density, chart.kind()) {
        (DensityKind::Zero, _) => zero,
        (DensityKind::Example, DomainKind::Cylinder) => cylinder_density,
        (DensityKind::Example, DomainKind::Plane) => bump_density,
    }
}

/// Convergence study over the configured spacings. Layer studies are
/// measured against a Richardson reference from the two finest levels;
/// the trapezoid study against `π^{3/2}`. The slope is fitted over the
/// last four levels that carry an error.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let id = cfg.id.as_str();
    let p = cfg.order;
    let mut values = Vec::new();
    let mut hs = Vec::new();
    let mut times = Vec::new();
    let mut params = Vec::new();
    match cfg.study {
        StudyKind::Trapezoid => {
            let identity = ComplexQuadraticForm::identity();
            for &h in &cfg.h {
                let t0 = Instant::now();
                let n = (cfg.half_width.min(7.0) / h).ceil() as i64;
                let grid = GridSpec::plane(h, (0.0, 0.0), n, n)?;
                let g = grid.sample(|x, y| {
                    if cfg.density == DensityKind::Zero {
                        C64::new(0.0, 0.0)
                    } else {
                        C64::new((-(x * x + y * y)).exp(), 0.0)
                    }
                });
                let v = if p == 1 {
                    punctured_trapezoid(&g, &identity, c(0.5, 0.0), &grid)?
                } else {
                    corrected_trapezoid(&g, &identity, 0.5, &grid, p)?
                };
                values.push(v);
                hs.push(h);
                times.push(t0.elapsed().as_secs_f64());
                params.push(format!("study=trapezoid;order={p};h={h}"));
            }
        }
        StudyKind::Layer(kind) => {
            let chart = builtin(&cfg.geometry)?;
            let kernel = KernelSpec::new(kind, c(cfg.k, 0.0))?;
            let density = study_density(cfg, chart.as_ref());
            for &h in &cfg.h {
                let t0 = Instant::now();
                let grid = study_grid(chart.as_ref(), h, cfg.target, cfg.half_width)?;
                let g = grid.sample(density);
                let v = layer_potential_at(chart.as_ref(), &grid, &g, kernel, p, (0, 0))?;
                let (h1, _) = grid.spacing();
                values.push(v);
                hs.push(h1);
                times.push(t0.elapsed().as_secs_f64());
                params.push(format!(
                    "geometry={};kernel={kind:?};k={};order={p};target=({},{});h={h1};nodes={}",
                    cfg.geometry,
                    cfg.k,
                    cfg.target.0,
                    cfg.target.1,
                    grid.len()
                ));
            }
        }
    }

    let m = values.len();
    let (reference, with_error) = match cfg.study {
        StudyKind::Trapezoid => (c(PI.powf(1.5), 0.0), m),
        StudyKind::Layer(_) => {
            if m < 2 {
                return Err(Error::Config("grid.h: a layer study needs at least two spacings".into()));
            }
            let r = (hs[m - 2] / hs[m - 1]).powi(p as i32);
            ((values[m - 1] * r - values[m - 2]) / (r - 1.0), m - 1)
        }
    };
    if cfg.density == DensityKind::Zero && matches!(cfg.study, StudyKind::Trapezoid) {
        // The exact integral of the zero density is zero.
        return zero_density_table(id, &params, &values, &times);
    }
    let mut table = ResultTable::default();
    for i in 0..m {
        table.push(ResultRow::new(id, params[i].clone(), values[i], reference).timed(times[i]));
    }
    let start = with_error.saturating_sub(4);
    let errs: Vec<f64> = table.rows[start..with_error].iter().map(|r| r.abs_error).collect();
    let h_fit = &hs[start..with_error];
    if errs.iter().all(|&e| e == 0.0) {
        table.push(
            ResultRow::new(id, format!("check=all_errors_zero;levels={}", errs.len()), c(0.0, 0.0), c(0.0, 0.0))
                .check(true),
        );
        return Ok(table);
    }
    let slope = if errs.len() >= 2 && errs.iter().all(|&e| e > 0.0) {
        convergence_slope(h_fit, &errs)
    } else {
        f64::NAN
    };
    let mut row = ResultRow::new(
        id,
        format!(
            "check=slope;levels={};band={}",
            errs.len(),
            cfg.slope_band.map_or("none".to_string(), |(a, b)| format!("[{a},{b}]"))
        ),
        c(slope, 0.0),
        c(p as f64, 0.0),
    );
    if let Some((lo, hi)) = cfg.slope_band {
        row = row.check(slope >= lo && slope <= hi);
    }
    table.push(row);
    Ok(table)
}

fn zero_density_table(id: &str, params: &[String], values: &[C64], times: &[f64]) -> Result<ResultTable> {
    let mut table = ResultTable::default();
    for ((p, v), t) in params.iter().zip(values).zip(times) {
        let row = ResultRow::new(id, p.clone(), *v, C64::new(0.0, 0.0)).timed(*t);
        let ok = row.abs_error == 0.0;
        table.push(row.check(ok));
    }
    Ok(table)
}

fn side_path(output: &Path, what: &str, h: f64) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("result");
    output.with_file_name(format!("{stem}_{what}_h{h}.csv"))
}

/// Combined-field Dirichlet solve on the configured plane chart with
/// point-source data. One summary row per spacing, then the error ratio
/// between consecutive spacings and the density decay trend outside the
/// onset window. Field slices and density magnitudes go to side files
/// next to the main output.
pub fn run_halfspace_solve(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let id = cfg.id.as_str();
    let chart = builtin(&cfg.geometry)?;
    if chart.kind() != DomainKind::Plane {
        return Err(Error::Config("geometry.name: the solve needs a plane chart".into()));
    }
    let st = &cfg.solve;
    let k = c(cfg.k, 0.0);
    let steps = (st.window / st.target_step).floor() as i64;
    let targets: Vec<[f64; 3]> = (-steps..=steps)
        .flat_map(|i| (-steps..=steps).map(move |j| (i, j)))
        .map(|(i, j)| [i as f64 * st.target_step, j as f64 * st.target_step, st.target_height])
        .collect();
    let exact = exact_field(st.source, k, &targets);
    let probe = targets.len() / 2;

    let mut table = ResultTable::default();
    let mut level_errors = Vec::new();
    for &h in &cfg.h {
        let t0 = Instant::now();
        let n = (2.0 * cfg.half_width / h).round() as i64;
        let grid = GridSpec::plane_box(h, h, (0.0, 0.0), (-n / 2, -n / 2), (n / 2 - 1, n / 2 - 1))?;
        let mut op = assemble_combined_field(chart.as_ref(), &grid, k, cfg.order)?;
        op.set_node_budget(st.node_budget);
        op.set_deterministic(cfg.deterministic);
        let f = point_source_data(st.source, k, chart.as_ref(), &grid)?;
        let solver = if grid.len() <= st.node_budget {
            SolverKind::DenseLu
        } else {
            SolverKind::Iterative(GmresOptions {
                restart: st.restart,
                tol: st.tol,
                ..GmresOptions::default()
            })
        };
        let (sigma, report) = solve_dirichlet(&op, &f, solver)?;
        let u = evaluate_with_nodes(op.nodes(), &grid, &sigma, k, &targets)?;
        let rel: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| relative(*a, *b)).collect();
        let abs: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| (a - b).norm()).collect();
        let max_rel = rel.iter().copied().fold(0.0, f64::max);
        let max_abs = abs.iter().copied().fold(0.0, f64::max);

        let slice: Vec<Vec<f64>> = targets
            .iter()
            .zip(u.iter().zip(&exact))
            .zip(&rel)
            .map(|((t, (a, b)), r)| vec![t[0], t[1], t[2], a.re, a.im, b.re, b.im, *r])
            .collect();
        write_columns(
            &side_path(&cfg.output, "slice", h),
            &["x1", "x2", "x3", "u_re", "u_im", "exact_re", "exact_im", "rel_error"],
            &slice,
        )?;
        let dens: Vec<Vec<f64>> = (0..grid.len())
            .map(|p| {
                let v = grid.point(grid.index(p));
                vec![v.0, v.1, sigma[p].norm()]
            })
            .collect();
        write_columns(&side_path(&cfg.output, "density", h), &["v1", "v2", "abs_sigma"], &dens)?;

        let mut row = ResultRow::new(
            id,
            format!(
                "geometry={};k={};order={};h={h};nodes={};solver={};iterations={};residual={:.3e};source=({},{},{});window={};height={}",
                cfg.geometry,
                cfg.k,
                cfg.order,
                grid.len(),
                report.solver,
                report.iterations,
                report.relative_residual,
                st.source[0],
                st.source[1],
                st.source[2],
                st.window,
                st.target_height
            ),
            u[probe],
            exact[probe],
        );
        // Summary errors are the maxima over the whole window.
        row.abs_error = max_abs;
        row.rel_error = max_rel;
        if level_errors.is_empty() {
            if let Some(tol) = st.max_error {
                row = row.check(max_rel <= tol);
            }
        }
        table.push(row.timed(t0.elapsed().as_secs_f64()));

        let bands = decay_bands(&grid, &sigma, st.onset, cfg.half_width);
        if bands.len() >= 2 {
            let monotone = bands.windows(2).all(|w| w[1] < w[0]);
            let list: Vec<String> = bands.iter().map(|b| format!("{b:.3e}")).collect();
            table.push(
                ResultRow::new(
                    id,
                    format!("check=density_decay;h={h};onset={};band_means=[{}]", st.onset, list.join(" ")),
                    c(bands[bands.len() - 1] / bands[0], 0.0),
                    c(0.0, 0.0),
                )
                .check(monotone),
            );
        }
        level_errors.push((h, max_rel));
    }
    for w in level_errors.windows(2) {
        let ratio = w[0].1 / w[1].1;
        let mut row = ResultRow::new(
            id,
            format!("check=error_ratio;h_coarse={};h_fine={}", w[0].0, w[1].0),
            c(ratio, 0.0),
            c(st.min_ratio.unwrap_or(0.0), 0.0),
        );
        if let Some(min) = st.min_ratio {
            row = row.check(ratio >= min);
        }
        table.push(row);
    }
    Ok(table)
}

// Mean |σ| over unit-wide square annuli max(|v₁|, |v₂|) ∈ [onset + j, onset + j + 1).
fn decay_bands(grid: &GridSpec, sigma: &[C64], onset: f64, half_width: f64) -> Vec<f64> {
    let nb = (half_width - onset).floor().max(0.0) as usize;
    let mut sum = vec![0.0; nb];
    let mut count = vec![0usize; nb];
    for (p, s) in sigma.iter().enumerate() {
        let v = grid.point(grid.index(p));
        let r = v.0.abs().max(v.1.abs()) - onset;
        if r >= 0.0 && (r as usize) < nb {
            sum[r as usize] += s.norm();
            count[r as usize] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| s / n as f64)
        .collect()
}
