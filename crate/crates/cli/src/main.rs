use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nodal_forge::lab::{
    build_scenario_mesh, nodal_export, run_oracle, run_scenario, Scenario, ScenarioName,
    ORACLE_NAMES,
};
use nodal_forge::mesh::MeshFile;

#[derive(Parser)]
#[command(
    name = "nodal-forge",
    version,
    about = "Collar eigenfunction experiments on simplicial meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in scenario or a TOML config and write JSON and CSV reports.
    Run {
        /// Scenario name (see `list`) or path to a `.toml` config.
        scenario: String,
        /// Override the eps sweep, e.g. `--eps 0.2,0.1,0.05`.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Override the base mesh refinement level.
        #[arg(long)]
        refine: Option<usize>,
        /// Override the eigensolver seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the mesh as `<scenario>.mesh.json`.
        #[arg(long)]
        emit_mesh: bool,
        /// Also write nodal sets at the smallest eps as `<scenario>.nodal.k<k>.json`.
        #[arg(long)]
        emit_nodal: bool,
    },
    /// Run an analytic or dense-solver oracle check.
    Oracle {
        /// One of dense-agreement, sphere-convergence, flat-torus, cayley-menger, all.
        name: String,
    },
    /// List built-in scenarios and oracles.
    List,
}

fn load(spec: &str) -> Result<Scenario, String> {
    if spec.ends_with(".toml") || Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).map_err(|e| format!("reading {spec}: {e}"))?;
        Scenario::from_toml(&text).map_err(|e| format!("{spec}: {e}"))
    } else {
        let name: ScenarioName = spec.parse().map_err(|e| format!("{e}"))?;
        Ok(Scenario::builtin(name))
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string(value).map_err(|e| e.to_string())?;
    std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    spec: &str,
    eps: Option<Vec<f64>>,
    refine: Option<usize>,
    seed: Option<u64>,
    out: &Path,
    emit_mesh: bool,
    emit_nodal: bool,
) -> Result<bool, String> {
    let mut sc = load(spec)?;
    if let Some(e) = eps {
        sc.eps_list = e;
    }
    if let Some(r) = refine {
        sc.refinement = r;
    }
    if let Some(s) = seed {
        sc.seed = s;
    }
    let report = run_scenario(&sc).map_err(|e| e.to_string())?;
    print!("{}", report.summary());
    for path in report.write(out).map_err(|e| e.to_string())? {
        println!("wrote {}", path.display());
    }
    // a guard retry changes the radii; emit what was actually analysed
    let used = &report.scenario;
    let stem = used.name.as_str();
    if emit_mesh {
        let mesh = build_scenario_mesh(used).map_err(|e| e.to_string())?;
        write_json(
            &out.join(format!("{stem}.mesh.json")),
            &MeshFile::from_mesh(&mesh),
        )?;
    }
    if emit_nodal {
        let eps = used.eps_list.last().copied().unwrap_or(1.0);
        for x in nodal_export(used, eps).map_err(|e| e.to_string())? {
            write_json(&out.join(format!("{stem}.nodal.k{}.json", x.k)), &x)?;
        }
    }
    Ok(report.pass())
}

fn oracle(name: &str) -> Result<bool, String> {
    let verdicts = run_oracle(name).map_err(|e| e.to_string())?;
    for v in &verdicts {
        println!(
            "{} {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
    }
    Ok(verdicts.iter().all(|v| v.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            eps,
            refine,
            seed,
            out,
            emit_mesh,
            emit_nodal,
        } => run(&scenario, eps, refine, seed, &out, emit_mesh, emit_nodal),
        Command::Oracle { name } => oracle(&name),
        Command::List => {
            println!("scenarios:");
            for s in ScenarioName::ALL {
                println!("  {s}");
            }
            println!("oracles:");
            for o in ORACLE_NAMES {
                println!("  {o}");
            }
            println!("  all");
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
