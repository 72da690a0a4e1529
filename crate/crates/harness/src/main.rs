use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kinetic_hj_harness::commands::execute;
use kinetic_hj_harness::{ExperimentConfig, Result, StudyMode};

#[derive(Parser, Debug)]
#[command(name = "kinhj", version, about = "Kinetic / Hamilton-Jacobi scheme experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scheme and write phi (and mu) at the output times.
    Run(Common),
    /// Compare the AP scheme with the limit scheme across eps.
    EpsSweep(Common),
    /// Grid-convergence study in dx, dv or dt.
    Converge {
        #[arg(long, value_enum)]
        mode: ConvMode,
        /// Candidate resolutions (comma separated).
        #[arg(long)]
        levels: Option<String>,
        /// Reference resolution.
        #[arg(long = "ref")]
        reference: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Spatial amplitude of the v = 0 slice over time.
    Amplitude(Common),
    /// Dirac surrogate under the limit scheme against the long-time cusp.
    Kernel {
        /// Window radius relative to T^{3/2}.
        #[arg(long)]
        radius: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ConvMode {
    Dx,
    Dv,
    Dt,
}

#[derive(Args, Debug)]
struct Common {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<String>,
    /// Comma-separated list.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    init: Option<String>,
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nv: Option<usize>,
    #[arg(long)]
    x_star: Option<f64>,
    #[arg(long)]
    v_star: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Comma-separated output times.
    #[arg(long)]
    times: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the full-resolution references of the convergence studies.
    #[arg(long)]
    full_scale: bool,
    /// Repeatable `key=value` override.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn into_config(self, mode: StudyMode, extra: &[(&str, String)]) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let mut cfg = ExperimentConfig::default();
                cfg.apply_text(&std::fs::read_to_string(path)?)?;
                cfg
            }
            None => ExperimentConfig::default(),
        };
        cfg.mode = mode;
        let mut overrides: Vec<(&str, String)> = Vec::new();
        if let Some(v) = self.scheme {
            overrides.push(("scheme", v));
        }
        if let Some(v) = self.eps {
            overrides.push(("eps", v));
        }
        if let Some(v) = self.init {
            overrides.push(("init", v));
        }
        if let Some(v) = self.t_final {
            overrides.push(("T", v.to_string()));
        }
        if let Some(v) = self.nx {
            overrides.push(("n_x", v.to_string()));
        }
        if let Some(v) = self.nv {
            overrides.push(("n_v", v.to_string()));
        }
        if let Some(v) = self.x_star {
            overrides.push(("x_star", v.to_string()));
        }
        if let Some(v) = self.v_star {
            overrides.push(("v_star", v.to_string()));
        }
        if let Some(v) = self.dt {
            overrides.push(("dt", v.to_string()));
        }
        if let Some(v) = self.times {
            overrides.push(("times", v));
        }
        if let Some(v) = self.out {
            overrides.push(("out", v.display().to_string()));
        }
        if self.full_scale {
            overrides.push(("full_scale", "true".into()));
        }
        for (k, v) in overrides.iter().chain(extra) {
            cfg.set(k, v)?;
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                kinetic_hj_harness::HarnessError::Config(format!("expected KEY=VALUE, got '{kv}'"))
            })?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn config_of(command: Command) -> Result<ExperimentConfig> {
    match command {
        Command::Run(c) => c.into_config(StudyMode::Run, &[]),
        Command::EpsSweep(c) => c.into_config(StudyMode::EpsSweep, &[]),
        Command::Amplitude(c) => c.into_config(StudyMode::Amplitude, &[]),
        Command::Converge { mode, levels, reference, common } => {
            let mode = match mode {
                ConvMode::Dx => StudyMode::ConvDx,
                ConvMode::Dv => StudyMode::ConvDv,
                ConvMode::Dt => StudyMode::ConvDt,
            };
            let mut extra = Vec::new();
            if let Some(l) = levels {
                extra.push(("levels", l));
            }
            if let Some(r) = reference {
                extra.push(("reference", r.to_string()));
            }
            common.into_config(mode, &extra)
        }
        Command::Kernel { radius, common } => {
            let mut extra = Vec::new();
            if let Some(r) = radius {
                extra.push(("kernel_radius", r.to_string()));
            }
            common.into_config(StudyMode::Kernel, &extra)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match config_of(cli.command).and_then(|cfg| execute(&cfg)) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kinetic_hj_harness::io::{read_field_csv, read_spatial_csv, read_table_csv};
    use std::path::Path;

    /// Parses and executes like `main`, minus the process exit.
    fn kinhj(args: &[&str]) -> Result<Vec<PathBuf>> {
        let cli = Cli::try_parse_from(std::iter::once("kinhj").chain(args.iter().copied()))
            .map_err(|e| kinetic_hj_harness::HarnessError::Config(e.to_string()))?;
        config_of(cli.command).and_then(|cfg| execute(&cfg))
    }

    fn path_str(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    #[test]
    fn run_writes_fields_and_a_reusable_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let files = kinhj(&[
            "run", "--scheme", "limit", "--init", "two-well", "--T", "1.5", "--nx", "32", "--nv", "21", "--out",
            path_str(&out),
        ])
        .unwrap();
        let names = files.iter().map(|f| f.file_name().unwrap().to_str().unwrap()).collect::<Vec<_>>();
        assert_eq!(names, ["phi.csv", "mu.csv", "manifest.txt"]);
        let phi = read_field_csv(&out.join("phi.csv")).unwrap();
        assert_eq!((phi.n_x(), phi.n_v()), (32, 21));
        assert!(phi.values().iter().all(|p| p.is_finite()));
        assert_eq!(read_spatial_csv(&out.join("mu.csv")).unwrap().values().len(), 32);

        let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
        assert!(manifest.contains("derived.dx"));
        let cfg = ExperimentConfig::from_text(&manifest).unwrap();
        assert_eq!(cfg.mode, StudyMode::Run);
        assert_eq!((cfg.n_x, cfg.n_v, cfg.t_final), (32, 21, 1.5));

        // re-running from the manifest reproduces the artifacts byte for byte
        let again = dir.path().join("again");
        kinhj(&["run", "--config", path_str(&out.join("manifest.txt")), "--out", path_str(&again)]).unwrap();
        for name in ["phi.csv", "mu.csv"] {
            assert_eq!(std::fs::read(out.join(name)).unwrap(), std::fs::read(again.join(name)).unwrap());
        }
    }

    #[test]
    fn multiple_output_times_get_tagged_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("ap");
        kinhj(&[
            "run", "--scheme", "ap", "--eps", "0.1", "--nx", "16", "--nv", "11", "--T", "0.5", "--times",
            "0.25,0.5", "--out", path_str(&out),
        ])
        .unwrap();
        for name in ["phi_t0p25.csv", "phi_t0p5.csv", "mu_t0p25.csv", "mu_t0p5.csv"] {
            assert!(out.join(name).is_file(), "{name} missing");
        }
    }

    #[test]
    fn bad_arguments_are_errors() {
        assert!(kinhj(&["run", "--no-such-flag"]).is_err());
        assert!(kinhj(&["converge", "--mode", "dz"]).is_err());
        assert!(kinhj(&["run", "--init", "gaussian"]).is_err());
        assert!(kinhj(&["run", "--set", "n_v"]).is_err());
        assert!(kinhj(&["run", "--T", "1", "--times", "2"]).is_err());
    }

    #[test]
    fn equilibrium_sweep_has_zero_errors() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sweep");
        kinhj(&[
            "eps-sweep", "--init", "equilibrium", "--eps", "1,0.1,0.01", "--nx", "16", "--nv", "21", "--T", "1.5",
            "--out", path_str(&out),
        ])
        .unwrap();
        for name in ["eps_errors_t0p15.csv", "eps_errors_t1p5.csv"] {
            let rows = read_table_csv(&out.join(name)).unwrap();
            assert_eq!(rows.len(), 3);
            assert!(rows.iter().all(|r| r.error == 0.0), "{name}: {rows:?}");
        }
    }

    #[test]
    fn single_eps_sweep_has_no_slope() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("one");
        kinhj(&["eps-sweep", "--eps", "0.1", "--nx", "16", "--nv", "21", "--T", "0.15", "--out", path_str(&out)])
            .unwrap();
        let rows = read_table_csv(&out.join("eps_errors_t0p15.csv")).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].order.is_none());
        let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
        assert!(!manifest.contains("fitted_slope"));
    }

    #[test]
    fn convergence_runs_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let run = |name: &str| {
            let out = dir.path().join(name);
            kinhj(&["converge", "--mode", "dx", "--levels", "16,32", "--ref", "128", "--out", path_str(&out)])
                .unwrap();
            std::fs::read(out.join("errors.csv")).unwrap()
        };
        assert_eq!(run("a"), run("b"));
        let rows = read_table_csv(&dir.path().join("a").join("errors.csv")).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].error < rows[0].error);
    }

    #[test]
    fn oversized_studies_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let out = path_str(dir.path());
        let err = kinhj(&["converge", "--mode", "dx", "--ref", "8192", "--set", "max_cells=1000000", "--out", out]);
        assert!(matches!(err, Err(kinetic_hj_harness::HarnessError::TooLarge { .. })));
    }

    #[test]
    fn kernel_command_records_the_preset_it_ran() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("k");
        kinhj(&["kernel", "--nx", "64", "--nv", "21", "--T", "1", "--radius", "0.5", "--out", path_str(&out)])
            .unwrap();
        let mut rdr = csv::Reader::from_path(out.join("kernel.csv")).unwrap();
        let header = rdr.headers().unwrap().iter().map(String::from).collect::<Vec<_>>();
        assert_eq!(header, ["x", "offset", "profile", "cusp", "kernel"]);
        assert_eq!(rdr.records().count(), 64);
        let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
        assert!(manifest.contains("derived.kernel.deviation"));
        assert!(manifest.contains("init = dirac\n"));
    }
}
