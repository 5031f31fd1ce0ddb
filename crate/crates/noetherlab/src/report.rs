//! Verification reports and file outputs: pass/fail tables for the
//! symmetry catalog and the conservation-law table, CSV time series for
//! simulations, and an aggregate Markdown report.
//!
//! All iteration orders and float formats are fixed, so a given seed
//! produces byte-identical output.

use crate::config::{run_simulation, ConfigError, SimConfig, SimOutput};
use crate::expr::is_zero;
use crate::noether::{
    euler_table, lagrangian_divergence_on_shell, match_current, noether_current,
    noether_identity_defect, to_eulerian, verify_eulerian_divergence, ConservedCurrent,
};
use crate::rng::Srng;
use crate::symmetry::{catalog, check_admitted, classifying_residuals, CatalogEntry};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, serde::Serialize)]
pub struct SymmetryRow {
    pub entry: String,
    pub generator: String,
    pub citation: String,
    pub admitted: bool,
    pub residual: String,
    pub worst_ratio: f64,
    pub classifying_ok: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SymmetryReport {
    pub seed: u64,
    pub rows: Vec<SymmetryRow>,
    pub notes: Vec<String>,
}

impl SymmetryReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.admitted && r.classifying_ok)
    }
}

/// Runs the admitted-symmetry and classifying-equation checks over the
/// catalog (optionally a single entry).
pub fn verify_symmetries(entry_filter: Option<&str>, seed: u64) -> Result<SymmetryReport, ConfigError> {
    let mut rng = Srng::new(seed);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let entries: Vec<&CatalogEntry> = catalog()
        .iter()
        .filter(|e| entry_filter.map(|f| e.name == f).unwrap_or(true))
        .collect();
    if entries.is_empty() {
        return Err(ConfigError::UnknownEntry(entry_filter.unwrap_or("<none>").into()));
    }
    for e in entries {
        for n in &e.notes {
            notes.push(format!("{}: {n}", e.name));
        }
        for (g, cit) in e.generators.iter().zip(e.generator_citations.iter()) {
            let verdict = check_admitted(g, &e.model, &mut rng)?;
            let classifying_ok = match classifying_residuals(g, &e.model) {
                Ok(rs) => rs.iter().all(|r| {
                    is_zero(r, &e.model.domain, &mut rng).map(|z| z.is_zero).unwrap_or(false)
                }),
                Err(_) => false,
            };
            rows.push(SymmetryRow {
                entry: e.name.clone(),
                generator: g.name.clone(),
                citation: cit.clone(),
                admitted: verdict.admitted,
                residual: if verdict.admitted { String::new() } else { verdict.residual.to_string() },
                worst_ratio: verdict.outcome.worst_ratio,
                classifying_ok,
            });
        }
    }
    Ok(SymmetryReport { seed, rows, notes })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CurrentRow {
    pub row: String,
    pub entry: String,
    pub generator: String,
    pub condition: String,
    /// derived = scalar * encoded + trivial current
    pub scalar: String,
    pub encoded_divergence_ok: bool,
    pub identity_ok: bool,
    pub lagrangian_density: String,
    pub lagrangian_flux: String,
    pub eulerian_density: String,
    pub eulerian_flux: String,
    pub note: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CurrentsReport {
    pub seed: u64,
    pub rows: Vec<CurrentRow>,
    pub notes: Vec<String>,
}

impl CurrentsReport {
    pub fn all_passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| !r.scalar.is_empty() && r.encoded_divergence_ok && r.identity_ok)
    }
}

/// Derives every encoded conservation law through the Noether machinery,
/// matches it against the table, and checks the encoded rows' divergences.
pub fn verify_currents(entry_filter: Option<&str>, seed: u64) -> Result<CurrentsReport, ConfigError> {
    let mut rng = Srng::new(seed);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for row in euler_table() {
        if let Some(f) = entry_filter {
            if row.entry != f {
                continue;
            }
        }
        let e = crate::symmetry::entry(&row.entry)
            .ok_or_else(|| ConfigError::UnknownEntry(row.entry.clone()))?;
        let gen = e
            .generator(&row.generator)
            .ok_or_else(|| ConfigError::UnknownGenerator(row.generator.clone(), row.entry.clone()))?;
        let lag = noether_current(gen, &e.model, &mut rng)?;
        let identity_ok = noether_identity_defect(gen, &lag, &e.model)?.is_zero_expr();
        let eul = to_eulerian(&lag)?;
        let scalar = match match_current(&eul, &row.current, &e.model, &mut rng) {
            Ok(m) => crate::noether::scalar_str(&m.scalar),
            Err(err) => {
                notes.push(format!("{}: match failed: {err}", row.name));
                String::new()
            }
        };
        let encoded_divergence_ok = verify_eulerian_divergence(&row.current, &e.model, &mut rng)?;
        if let Some(printed) = &row.printed_variant {
            let printed_ok = verify_eulerian_divergence(printed, &e.model, &mut rng)?;
            notes.push(format!(
                "{}: derived-vs-printed difference: the printed variant {} the divergence check; {}",
                row.name,
                if printed_ok { "passes" } else { "fails" },
                row.note
            ));
        }
        rows.push(CurrentRow {
            row: row.name.clone(),
            entry: row.entry.clone(),
            generator: row.generator.clone(),
            condition: row.condition.clone(),
            scalar,
            encoded_divergence_ok,
            identity_ok,
            lagrangian_density: lag.density.to_string(),
            lagrangian_flux: lag.flux.to_string(),
            eulerian_density: eul.density.to_string(),
            eulerian_flux: eul.flux.to_string(),
            note: row.note.clone(),
        });
    }
    Ok(CurrentsReport { seed, rows, notes })
}

/// A single derived current, for `derive-current`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DerivedCurrent {
    pub entry: String,
    pub generator: String,
    pub frame: String,
    pub density: String,
    pub flux: String,
    pub divergence_ok: bool,
}

pub fn derive_current(
    entry_name: &str,
    generator_name: &str,
    eulerian: bool,
    seed: u64,
) -> Result<DerivedCurrent, ConfigError> {
    let mut rng = Srng::new(seed);
    let e = crate::symmetry::entry(entry_name)
        .ok_or_else(|| ConfigError::UnknownEntry(entry_name.into()))?;
    let gen = e
        .generator(generator_name)
        .ok_or_else(|| ConfigError::UnknownGenerator(generator_name.into(), entry_name.into()))?;
    let lag = noether_current(gen, &e.model, &mut rng)?;
    let (current, divergence_ok): (ConservedCurrent, bool) = if eulerian {
        let eul = to_eulerian(&lag)?;
        let ok = verify_eulerian_divergence(&eul, &e.model, &mut rng)?;
        (eul, ok)
    } else {
        let div = lagrangian_divergence_on_shell(&lag, &e.model)?;
        let ok = is_zero(&div, &e.model.domain, &mut rng)?.is_zero;
        (lag, ok)
    };
    Ok(DerivedCurrent {
        entry: entry_name.into(),
        generator: generator_name.into(),
        frame: if eulerian { "eulerian".into() } else { "lagrangian".into() },
        density: current.density.to_string(),
        flux: current.flux.to_string(),
        divergence_ok,
    })
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn fmt_f(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn symmetry_report_text(r: &SymmetryReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "admitted-symmetry verification (seed {})", r.seed);
    let _ = writeln!(out, "{:-<78}", "");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{:<26} {:<4} {:<10} classify={:<5} |res| < {}",
            row.entry,
            row.generator,
            if row.admitted { "pass" } else { "FAIL" },
            row.classifying_ok,
            fmt_f(row.worst_ratio.max(1e-300)),
        );
        if !row.admitted {
            let _ = writeln!(out, "    residual: {}", row.residual);
        }
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let _ = writeln!(
        out,
        "{} generators checked, {}",
        r.rows.len(),
        if r.all_passed() { "all pass" } else { "FAILURES PRESENT" }
    );
    out
}

pub fn currents_report_text(r: &CurrentsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conservation-law verification (seed {})", r.seed);
    let _ = writeln!(out, "{:-<78}", "");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{:<24} {:<22} scalar={:<6} divergence={} identity={}",
            row.row,
            format!("{}/{}", row.entry, row.generator),
            if row.scalar.is_empty() { "FAIL" } else { &row.scalar },
            if row.encoded_divergence_ok { "pass" } else { "FAIL" },
            if row.identity_ok { "pass" } else { "FAIL" },
        );
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let _ = writeln!(
        out,
        "{} rows checked, {}",
        r.rows.len(),
        if r.all_passed() { "all pass" } else { "FAILURES PRESENT" }
    );
    out
}

/// CSV with one row per step: step, t, one column per monitor, cfl_dt,
/// min_phi_s.
pub fn monitors_csv(out: &SimOutput) -> String {
    let mut s = String::from("step,t");
    for n in &out.series.names {
        let _ = write!(s, ",{n}");
    }
    s.push_str(",cfl_dt,min_phi_s\n");
    for r in &out.series.records {
        let _ = write!(s, "{},{}", r.step, fmt_f(r.t));
        for v in &r.values {
            let _ = write!(s, ",{}", fmt_f(*v));
        }
        let _ = writeln!(s, ",{},{}", fmt_f(r.cfl_dt), fmt_f(r.min_phi_s));
    }
    s
}

/// CSV field snapshot: s, phi, phi_t, x, rho, u.
pub fn snapshot_csv(snap: &crate::config::Snapshot) -> String {
    let mut s = String::from("s,phi,phi_t,x,rho,u\n");
    let grid = &snap.state.grid;
    for i in 0..grid.n {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f(grid.node(i)),
            fmt_f(snap.state.phi[i]),
            fmt_f(snap.state.phi_t[i]),
            fmt_f(snap.fields.x[i]),
            fmt_f(snap.fields.rho[i]),
            fmt_f(snap.fields.u[i]),
        );
    }
    s
}

/// Writes the simulation artifacts into `dir` (monitors.csv and numbered
/// snapshot files); returns the paths written.
pub fn write_simulation(out: &SimOutput, dir: &Path) -> Result<Vec<std::path::PathBuf>, ConfigError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mpath = dir.join("monitors.csv");
    std::fs::write(&mpath, monitors_csv(out))?;
    written.push(mpath);
    for (k, snap) in out.snapshots.iter().enumerate() {
        let p = dir.join(format!("snapshot_{k}.csv"));
        std::fs::write(&p, snapshot_csv(snap))?;
        written.push(p);
    }
    Ok(written)
}

/// Markdown drift table for a finished run.
pub fn drift_table_md(out: &SimOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "| monitor | initial | final | max drift |");
    let _ = writeln!(s, "|---|---|---|---|");
    for m in &out.series.monitors {
        let q0 = m.initial.unwrap_or(0.0);
        let qn = m.values.last().copied().unwrap_or(0.0);
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} |",
            m.name,
            fmt_f(q0),
            fmt_f(qn),
            fmt_f(m.max_drift())
        );
    }
    s
}

/// The aggregate Markdown report: symmetry table, currents table, and the
/// preset simulations with drift tables.  Deterministic for a fixed seed.
pub fn full_report(seed: u64) -> Result<String, ConfigError> {
    let mut md = String::new();
    let _ = writeln!(md, "# noetherlab verification report\n");
    let _ = writeln!(md, "seed: {seed}\n");

    let sym = verify_symmetries(None, seed)?;
    let _ = writeln!(md, "## Admitted symmetries\n");
    let _ = writeln!(md, "| entry | generator | admitted | classifying |");
    let _ = writeln!(md, "|---|---|---|---|");
    for r in &sym.rows {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} |",
            r.entry,
            r.generator,
            if r.admitted { "pass" } else { "**FAIL**" },
            if r.classifying_ok { "pass" } else { "**FAIL**" }
        );
    }
    let _ = writeln!(md);
    for n in &sym.notes {
        let _ = writeln!(md, "- {n}");
    }

    let cur = verify_currents(None, seed)?;
    let _ = writeln!(md, "\n## Conservation laws (Eulerian table)\n");
    let _ = writeln!(md, "| row | generator | scalar | divergence | identity |");
    let _ = writeln!(md, "|---|---|---|---|---|");
    for r in &cur.rows {
        let _ = writeln!(
            md,
            "| {} | {}/{} | {} | {} | {} |",
            r.row,
            r.entry,
            r.generator,
            if r.scalar.is_empty() { "**FAIL**" } else { &r.scalar },
            if r.encoded_divergence_ok { "pass" } else { "**FAIL**" },
            if r.identity_ok { "pass" } else { "**FAIL**" }
        );
    }
    let _ = writeln!(md);
    for n in &cur.notes {
        let _ = writeln!(md, "- {n}");
    }

    let _ = writeln!(md, "\n## Discrete conservation runs\n");
    for (title, cfg_json) in preset_runs(seed) {
        let cfg = SimConfig::from_json(&cfg_json)?;
        let out = run_simulation(&cfg)?;
        let _ = writeln!(md, "### {title}\n");
        let _ = writeln!(
            md,
            "model: {} | grid n = {}, t_end = {}\n",
            out.model_description, cfg.grid.n, cfg.t_end
        );
        md.push_str(&drift_table_md(&out));
        let _ = writeln!(md);
    }

    let _ = writeln!(
        md,
        "\nverdict: {}",
        if sym.all_passed() && cur.all_passed() { "all checks pass" } else { "FAILURES PRESENT" }
    );
    Ok(md)
}

/// The report's built-in desk-scale runs.
pub fn preset_runs(seed: u64) -> Vec<(String, String)> {
    let shallow = format!(
        r#"{{
        "model": {{"g": {{"family": "power", "lambda": "-3", "c": "0"}},
                  "h": {{"family": "zero"}}, "domain": {{}}}},
        "grid": {{"n": 400, "length": 6.283185307179586, "boundary": "periodic"}},
        "ic": {{"kind": "gaussian_velocity", "slope": 1.0, "amplitude": 0.08,
               "center": 0.5, "width": 0.09}},
        "monitors": [{{"name": "momentum"}}, {{"name": "energy"}},
                     {{"name": "center-of-mass"}},
                     {{"name": "scaling", "xi_t": "-5*t", "xi_s": "s", "eta": "-3*phi"}}],
        "t_end": 1.0,
        "seed": {seed}
    }}"#
    );
    let quartic = format!(
        r#"{{
        "model": {{"entry": "powG-H0-lam4"}},
        "grid": {{"n": 400, "length": 6.283185307179586, "boundary": "periodic"}},
        "ic": {{"kind": "sinusoidal_slope", "slope": 1.0, "amplitude": 0.1, "wavenumber": 2}},
        "monitors": [{{"name": "momentum"}}, {{"name": "dilation", "generator": "X6"}},
                     {{"name": "projective", "generator": "X7"}}],
        "t_end": 1.0,
        "seed": {seed}
    }}"#
    );
    vec![
        ("shallow water (lambda = -3, H = 0)".into(), shallow),
        ("quartic inverse power (lambda = -4, H = 0)".into(), quartic),
    ]
}
