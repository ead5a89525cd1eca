use std::io::Write;
use std::path::Path;

use log::info;
use pairple::master_equation::Mat4;
use pairple::steady_state::evolve_with_retry;
use pairple::{
    build_liouvillian, gamma_12, intensity_factors, omega_12, oracle_schedule, ple_scan,
    polarization_scan, solve_steady, to_collective, total_intensity, Couplings64,
    DensityMatrix64, PeakKind, PleSpectrum64,
};

use crate::config::Config;
use crate::{svg, CliError};

/// Float formatting shared by every table: 12 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut impl Write, body: &str) -> Result<(), CliError> {
    out.write_all(body.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write output: {e}")))
}

/// `theta,gamma12,omega12` at the configured angle or over a sweep.
pub fn couplings(cfg: &Config, sweep: Option<usize>, out: &mut impl Write) -> Result<(), CliError> {
    let params = cfg.params()?;
    let x = cfg.geometry()?.derive()?.k0r12;
    let thetas = match sweep {
        Some(n) => cfg.theta_grid_with(n)?,
        None => vec![cfg.theta],
    };
    let mut s = String::from("theta,gamma12,omega12\n");
    for t in thetas {
        let g = gamma_12(&params, x, t)?;
        let o = omega_12(&params, x, t)?;
        s += &format!("{},{},{}\n", num(t), num(g), num(o));
    }
    emit(out, &s)
}

fn matrix_rows(s: &mut String, basis: &str, m: &Mat4<f64>) {
    for r in 0..4 {
        for c in 0..4 {
            let z = m[(r, c)];
            *s += &format!("{basis},{r},{c},{},{}\n", num(z.re), num(z.im));
        }
    }
}

/// Steady-state density matrix in both bases, followed by a summary table.
pub fn steady(
    cfg: &Config,
    detuning: Option<f64>,
    oracle: bool,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let det = match detuning {
        Some(d) => d,
        None => cfg.detuning_min.ok_or_else(|| {
            CliError::Config("missing required key `detuning_min` (or pass --detuning)".into())
        })?,
    };
    let params = cfg.params()?.with_detuning(det);
    let geom = cfg.geometry()?;
    let g = geom.derive()?;
    let coup = Couplings64::compute(&params, &g)?;
    let l = build_liouvillian(&params, &coup)?;
    let rho = solve_steady(&l)?;
    let rho_c = to_collective(&rho);
    let intensity = total_intensity(&rho_c, &intensity_factors(&params, &geom, &g));

    let mut s = String::from("basis,row,col,re,im\n");
    matrix_rows(&mut s, "product", rho.matrix());
    matrix_rows(&mut s, "collective", &rho_c);
    s += "\nquantity,value\n";
    s += &format!("detuning,{}\n", num(det));
    s += &format!("residual,{}\n", num(l.residual(rho.matrix())));
    s += &format!("intensity,{}\n", num(intensity));
    if oracle {
        let (t_auto, dt_auto) = oracle_schedule(&l);
        let t_max = cfg.t_max.unwrap_or(t_auto);
        let dt = cfg.dt.unwrap_or(dt_auto);
        info!("oracle: t_max = {t_max}, dt = {dt}");
        let ev = evolve_with_retry(&l, &DensityMatrix64::ground(), t_max, dt)?;
        let diff = (ev.rho.matrix() - rho.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        s += &format!("oracle_max_diff,{}\n", num(diff));
        s += &format!("oracle_t_max,{}\n", num(ev.t_max));
        s += &format!("oracle_dt,{}\n", num(ev.dt));
    }
    emit(out, &s)
}

fn peak_table(spec: &PleSpectrum64) -> String {
    let mut s = String::from("position,height,kind,prominence\n");
    for p in &spec.peaks {
        let kind = match p.kind {
            PeakKind::Maximum => "max",
            PeakKind::Minimum => "min",
        };
        s += &format!(
            "{},{},{kind},{}\n",
            num(p.position),
            num(p.height),
            num(p.prominence)
        );
    }
    s
}

/// `detuning,intensity`, then the peak table (inline unless `peaks` is given).
pub fn ple(
    cfg: &Config,
    svg_path: Option<&Path>,
    peaks_path: Option<&Path>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let grid = cfg.detuning_grid()?;
    let spec = ple_scan(&cfg.params()?, &cfg.geometry()?, &grid)?;
    info!("ple: {} points, {} extrema", grid.len(), spec.peaks.len());
    let mut s = String::from("detuning,intensity\n");
    for (d, i) in spec.detuning_grid.iter().zip(&spec.intensity) {
        s += &format!("{},{}\n", num(*d), num(*i));
    }
    let table = peak_table(&spec);
    match peaks_path {
        Some(p) => write_file(p, &table)?,
        None => {
            s.push('\n');
            s += &table;
        }
    }
    if let Some(p) = svg_path {
        write_file(p, &svg::line_plot(&spec.detuning_grid, &spec.intensity))?;
    }
    emit(out, &s)
}

/// `theta,detuning,intensity` surface, then the side-peak trail.
pub fn polscan(cfg: &Config, trail_path: Option<&Path>, out: &mut impl Write) -> Result<(), CliError> {
    let thetas = cfg.theta_grid()?;
    let grid = cfg.detuning_grid()?;
    let scan = polarization_scan(&cfg.params()?, &cfg.geometry()?, &thetas, &grid)?;
    let mut s = String::from("theta,detuning,intensity\n");
    for (t, spec) in scan.theta_grid.iter().zip(&scan.spectra) {
        for (d, i) in spec.detuning_grid.iter().zip(&spec.intensity) {
            s += &format!("{},{},{}\n", num(*t), num(*d), num(*i));
        }
    }
    let mut table = String::from("theta,trail\n");
    for (t, p) in scan.theta_grid.iter().zip(&scan.trail) {
        let p = p.map(num).unwrap_or_default();
        table += &format!("{},{p}\n", num(*t));
    }
    match trail_path {
        Some(p) => write_file(p, &table)?,
        None => {
            s.push('\n');
            s += &table;
        }
    }
    emit(out, &s)
}
