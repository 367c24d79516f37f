//! One function per subcommand. Each writes its CSV tables and
//! `summary.json`, and returns whether every check passed.

use anyhow::{Context, Result};
use serde_json::{json, Value};

use qp_spectra::green::greens_entry;
use qp_spectra::ldt::{ldt_measure, Reference};
use qp_spectra::localization::{localization_batch, stabilization_chains};
use qp_spectra::lyapunov::{ap_multiscale_l, lyapunov_finite, LyapunovTable};
use qp_spectra::operator::{Orbit, Span};
use qp_spectra::prep::{count_zeros, DirichletDet, DiskSpec};
use qp_spectra::resonance::{ladder, ndr_scan, resonance_profile};
use qp_spectra::spectrum::{
    compare_sets, homogeneity_profile, restricted_spectrum, window_gamma, RestrictedSpectrumSpec,
};
use qp_spectra::torus::{sample_phases, Phase, SamplePlan, Scheme};

use crate::config::ExperimentConfig;
use crate::output::{Output, Table};
use crate::row;
use crate::suites;

fn gamma_for(cfg: &ExperimentConfig, window: (f64, f64)) -> Result<f64> {
    match cfg.params.gamma {
        Some(g) => Ok(g),
        None => Ok(window_gamma(&cfg.potential()?, &cfg.frequency()?, window)?),
    }
}

fn phases(cfg: &ExperimentConfig, count: usize, stream: u64) -> Result<Vec<Phase>> {
    Ok(sample_phases(&cfg.plan(count, stream)?)?)
}

pub fn lyap(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let plan = cfg.plan(cfg.sampling.phases, 1)?;
    let mut table = Table::new("lyapunov", &["energy", "n", "value", "stderr", "samples"]);
    let mut ap = Table::new("lyapunov_ap", &["energy", "block", "blocks", "value", "stderr", "failure_rate", "unreliable", "max_empirical_c"]);
    let mut violations = Vec::new();
    for &e in &cfg.lyap.energies {
        let mut prev: Option<(usize, f64, f64)> = None;
        for &n in &cfg.lyap.scales {
            let est = lyapunov_finite(&v, &w, e, n, &[], &plan)?;
            table.push(row![e, n, est.value, est.stderr, est.sample_count]);
            if let Some((m, l, s)) = prev {
                if n == 2 * m && est.value > l + 3.0 * s {
                    violations.push(json!({"energy": e, "n": m, "l_n": l, "l_2n": est.value, "stderr": s}));
                }
            }
            prev = Some((n, est.value, est.stderr));
        }
        let block = cfg.lyap.block;
        let top = cfg.lyap.scales.iter().copied().max().unwrap_or(block);
        let blocks = (top / block).max(3);
        let l_block = lyapunov_finite(&v, &w, e, block, &[], &plan)?.value;
        let mu = (block as f64 * l_block / 2.0).exp();
        let est = ap_multiscale_l(&v, &w, e, block, blocks, mu, &plan)?;
        ap.push(row![e, block, blocks, est.value, est.stderr, est.failure_rate, est.unreliable, est.max_empirical_c]);
    }
    out.write_table(&table)?;
    out.write_table(&ap)?;
    let ok = violations.is_empty();
    out.write_summary("lyap", cfg, ok, json!({ "subadditivity_violations": violations }))?;
    Ok(ok)
}

pub fn ldt(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let plan = cfg.plan(cfg.ldt.samples, 2)?;
    let mut table = Table::new("ldt", &["energy", "n", "p", "l_n", "l_n_stderr", "deviation_fraction", "samples"]);
    for &e in &cfg.ldt.energies {
        for &n in &cfg.ldt.scales {
            for &p in &cfg.ldt.p {
                let r = ldt_measure(&v, &w, e, n, p, &plan, cfg.ldt.target, Reference::SameSample)?;
                table.push(row![e, n, p, r.l_n_ref, r.l_n_stderr, r.deviation_fraction, r.sample_count]);
            }
        }
    }
    out.write_table(&table)?;
    out.write_summary("ldt", cfg, true, json!({ "rows": table.len() }))?;
    Ok(true)
}

pub fn green(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let xs = phases(cfg, cfg.green.draws, 3)?;
    let mut table = Table::new("green", &["draw", "n", "energy", "j", "k", "value", "oracle", "rel_err"]);
    let mut failures = Vec::new();
    for (draw, x) in xs.iter().enumerate() {
        let n = r.gen_range(1..=cfg.green.max_n.max(1));
        let span = Span::first(n);
        let orbit = Orbit::new(&v, x, &w, span)?;
        let h = orbit.hamiltonian(span);
        let e = r.gen_range(-(v.sup_norm() + 2.0)..(v.sup_norm() + 2.0));
        let (j, k) = (r.gen_range(0..n), r.gen_range(0..n));
        if h.eigen(false).dist(e) < 1e-3 {
            continue;
        }
        let mut m = DMatrix::from_fn(n, n, |i, l| match i.abs_diff(l) {
            0 => h.diag()[i] - e,
            1 => -1.0,
            _ => 0.0,
        });
        m = m.try_inverse().context("dense oracle is singular")?;
        let g = greens_entry(&orbit, span, e, 1 + j as i64, 1 + k as i64)?;
        let want = m[(j, k)];
        let err = (g.value - want).abs() / want.abs().max(1e-12 * m.amax());
        table.push(row![draw, n, e, j, k, g.value, want, err]);
        if err > 1e-6 {
            failures.push(json!({"draw": draw, "n": n, "energy": e, "j": j, "k": k, "value": g.value, "oracle": want}));
        }
    }
    out.write_table(&table)?;
    let ok = failures.is_empty();
    out.write_summary("green", cfg, ok, json!({ "failures": failures }))?;
    Ok(ok)
}

pub fn localize(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let c = &cfg.localize;
    let edge = v.sup_norm() + 2.0;
    let gamma = LyapunovTable::build(&v, &w, 512, (-edge, edge), 96, &cfg.plan(48, 4)?)?;
    let mut table = Table::new(
        "localization",
        &["sample", "j", "energy", "center", "interval_a", "interval_b", "mass_inside", "decay_rate", "rate_floor", "decays", "min_gap", "gap_bound", "separation_ok"],
    );
    let (mut eligible, mut decaying, mut sep_ok, mut total) = (0usize, 0usize, 0usize, 0usize);
    for (sample, x) in phases(cfg, c.samples, 5)?.iter().enumerate() {
        for (p, s) in localization_batch(&v, x, &w, Span::first(c.n), c.eps_mass, c.guard, c.c_sep, &gamma)? {
            total += 1;
            sep_ok += s.ok as usize;
            if 4.0 * p.rate_floor > 0.5 {
                eligible += 1;
                decaying += p.decays() as usize;
            }
            table.push(row![
                sample,
                p.j,
                p.energy,
                p.center,
                p.interval.a,
                p.interval.b,
                p.mass_inside,
                p.decay_rate.map_or(String::new(), |d| d.to_string()),
                p.rate_floor,
                p.decays(),
                s.min_gap,
                s.bound,
                s.ok
            ]);
        }
    }
    out.write_table(&table)?;
    let decay_fraction = decaying as f64 / eligible.max(1) as f64;
    let separation_fraction = sep_ok as f64 / total.max(1) as f64;
    let ok = eligible > 0 && decay_fraction >= 0.8 && separation_fraction >= 0.8;
    out.write_summary(
        "localize",
        cfg,
        ok,
        json!({"eligible": eligible, "decay_fraction": decay_fraction, "separation_fraction": separation_fraction}),
    )?;
    Ok(ok)
}

pub fn stabilize(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let c = &cfg.stabilize;
    let mut table = Table::new(
        "stabilization",
        &["sample", "j", "n", "n_prime", "j_prime", "energy_gap", "vector_distance", "overlap", "ambiguous", "boundary_mass"],
    );
    for (sample, x) in phases(cfg, c.samples, 6)?.iter().enumerate() {
        let js: Vec<usize> = (0..=2 * c.n).collect();
        for (j, chain) in stabilization_chains(&v, x, &w, c.n, &js, c.cap)?.into_iter().enumerate() {
            for m in chain {
                table.push(row![sample, j, m.n, m.n_prime, m.j_prime, m.energy_gap, m.vector_distance, m.overlap, m.ambiguous, m.boundary_mass]);
            }
        }
    }
    out.write_table(&table)?;
    out.write_summary("stabilize", cfg, true, json!({ "rows": table.len() }))?;
    Ok(true)
}

pub fn ndr(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let c = &cfg.ndr;
    let (sigma, tau) = (cfg.params.sigma, cfg.params.tau);
    let plan = cfg.plan(cfg.sampling.phases, 7)?;
    let x = phases(cfg, 1, 8)?.remove(0);
    let span = Span::new(c.span.0, c.span.1);
    let orbit = Orbit::new(&v, &x, &w, Span::new(span.a, span.b + c.ell as i64 - 1))?;
    let mut table = Table::new(
        "ndr",
        &["energy", "ell", "l_ell", "threshold", "failures", "k_raw", "k", "min_component_raw", "min_component", "component_floor"],
    );
    let opt = |m: Option<usize>| m.map_or(String::new(), |m| m.to_string());
    for &e in &c.energies {
        let l_ell = lyapunov_finite(&v, &w, e, c.ell, &[], &plan)?.value;
        let rep = ndr_scan(&orbit, e, c.ell, span, c.constant, l_ell, sigma, tau)?;
        table.push(row![e, c.ell, l_ell, rep.threshold, rep.failures.len(), rep.k_raw, rep.k, opt(rep.min_component_raw), opt(rep.min_component), rep.component_floor]);
    }
    let lad = ladder(c.ell, sigma, tau, &c.ladder, c.c_top)?;
    let mut levels = Table::new("ladder", &["level", "c_lo", "c_hi", "scale", "size", "admissible"]);
    for (k, l) in lad.levels.iter().enumerate() {
        levels.push(row![k + 1, l.c_lo, l.c_hi, l.scale, l.size, l.admissible]);
    }
    out.write_table(&table)?;
    out.write_table(&levels)?;
    out.write_summary("ndr", cfg, true, json!({ "ladder_admissible": lad.admissible(), "top_ok": lad.top_ok }))?;
    Ok(true)
}

pub fn resonance(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let c = &cfg.resonance;
    let omega = SamplePlan { scheme: Scheme::UniformRandom, ..cfg.plan(c.frequencies, 9)? };
    let xs = SamplePlan { scheme: Scheme::UniformRandom, ..cfg.plan(c.phases, 10)? };
    let prof = resonance_profile(&v, c.energy, c.ell, c.n, &w, &omega, &xs, cfg.params.sigma, cfg.params.tau)?;
    let mut table = Table::new("resonance", &["t0", "fraction"]);
    let fractions: Vec<f64> = c.t0.iter().map(|&t| prof.fraction(t)).collect();
    for (t, f) in c.t0.iter().zip(&fractions) {
        table.push(row![t, f]);
    }
    let mut seps = Table::new("resonance_separations", &["frequency", "max_separation"]);
    for (i, s) in prof.max_separation.iter().enumerate() {
        seps.push(row![i, s]);
    }
    out.write_table(&table)?;
    out.write_table(&seps)?;
    let ok = suites::non_increasing(&fractions, 1e-3);
    out.write_summary("resonance", cfg, ok, json!({ "fractions": fractions }))?;
    Ok(ok)
}

pub fn prep(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    use rand::{Rng, SeedableRng};

    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let c = &cfg.prep;
    let span = Span::first(c.length);
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = Table::new("prep", &["disk", "center", "radius", "count", "eigen_count", "winding", "retries"]);
    let mut failures = Vec::new();
    for (i, x) in phases(cfg, c.disks, 11)?.iter().enumerate() {
        let orbit = Orbit::new(&v, x, &w, span)?;
        let eig = orbit.hamiltonian(span).eigenvalues();
        let center = r.gen_range(eig[0]..=eig[eig.len() - 1]);
        let disk = DiskSpec::real(center, r.gen_range(0.05..1.0))?;
        let z = count_zeros(&DirichletDet::new(&orbit, span), &disk)?;
        let want = eig.iter().filter(|e| (*e - center).abs() < z.radius).count();
        table.push(row![i, center, z.radius, z.count, want, z.winding, z.retries]);
        if z.count != want {
            failures.push(json!({"disk": i, "center": center, "radius": z.radius, "count": z.count, "eigen_count": want}));
        }
    }
    out.write_table(&table)?;
    let ok = failures.is_empty();
    out.write_summary("prep", cfg, ok, json!({ "failures": failures }))?;
    Ok(ok)
}

pub fn spectrum(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let c = &cfg.spectrum;
    let gamma = gamma_for(cfg, c.window)?;
    let plan = cfg.plan(c.phases, 12)?;
    let reference_plan = cfg.plan(c.reference_phases, 13)?;
    let mut table = Table::new(
        "comparison",
        &["n", "gamma", "rho0", "rho_k", "measure", "reference_measure", "inclusion_defect", "excess", "excess_bound"],
    );
    let mut excess = Vec::new();
    for &n in &c.scales {
        let spec = RestrictedSpectrumSpec::with_decay(n, c.s, c.k0, gamma, c.rho0, plan.clone()).with_window(c.window);
        let reference = RestrictedSpectrumSpec::reference(n, c.s, reference_plan.clone()).with_window(c.window);
        let set = restricted_spectrum(&spec, &v, &w).with_context(|| format!("spectrum at N = {n}"))?;
        let refset = restricted_spectrum(&reference, &v, &w).with_context(|| format!("reference at N = {n}"))?;
        let (defect, ex) = compare_sets(&set, &refset, c.window)?;
        out.write_json(&format!("set_n{n}"), &set)?;
        out.write_json(&format!("reference_n{n}"), &refset)?;
        let rho_k = spec.rho.last().copied().unwrap_or(f64::NAN);
        table.push(row![n, gamma, spec.rho[0], rho_k, set.measure(), refset.measure(), defect, ex, (-gamma * n as f64 / 20.0).exp()]);
        excess.push(ex);
    }
    out.write_table(&table)?;
    let ok = suites::non_increasing(&excess, 1e-3);
    out.write_summary("spectrum", cfg, ok, json!({ "gamma": gamma, "excess": excess }))?;
    Ok(ok)
}

pub fn homog(cfg: &ExperimentConfig, out: &Output) -> Result<bool> {
    let v = cfg.potential()?;
    let w = cfg.frequency()?;
    let c = &cfg.homog;
    let gamma = gamma_for(cfg, c.window)?;
    let spec = RestrictedSpectrumSpec::with_decay(c.n, c.s, c.k0, gamma, c.rho0, cfg.plan(c.phases, 14)?).with_window(c.window);
    let set = restricted_spectrum(&spec, &v, &w)?;
    let prof = homogeneity_profile(&set, c.window, &c.deltas, c.samples)?;
    let mut table = Table::new("homogeneity", &["energy", "delta", "ratio"]);
    for r in &prof.rows {
        table.push(row![r.energy, r.delta, r.ratio]);
    }
    out.write_table(&table)?;
    out.write_json("set", &set)?;
    let ok = prof.holds();
    out.write_summary("homog", cfg, ok, json!({ "min_ratio": prof.min_ratio, "floor": prof.floor }))?;
    Ok(ok)
}

/// Runs the property suites; `ids` selects a subset.
pub fn selftest(cfg: &ExperimentConfig, out: &Output, ids: &[u32]) -> Result<bool> {
    let outcomes = suites::run(cfg.seed, cfg.selftest.profile, ids);
    let mut table = Table::new("selftest", &["criterion", "name", "metric", "value", "threshold", "pass"]);
    for o in &outcomes {
        println!("{}", o.line());
        for m in &o.metrics {
            table.push(row![o.id, o.name, m.name, m.value, m.threshold, o.pass]);
        }
        for t in &o.tables {
            out.write_table(t)?;
        }
    }
    out.write_table(&table)?;
    let ok = outcomes.iter().all(|o| o.pass);
    let results: Value = serde_json::to_value(&outcomes)?;
    out.write_summary("selftest", cfg, ok, json!({ "criteria": results }))?;
    Ok(ok)
}
