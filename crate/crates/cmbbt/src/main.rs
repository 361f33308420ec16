//! Command-line interface: read a JSON problem document and compute kernels,
//! spectra, generalized eigenspaces or semi-infinite bound states.

use clap::{Parser, Subcommand};
use cmbbt::boundary;
use cmbbt::doc::ProblemDocument;
use cmbbt::eigensystem::{self, SearchConfig};
use cmbbt::error::Error;
use cmbbt::models::{self, KitaevParams};
use cmbbt::semiinfinite;
use num_complex::Complex64;
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cmbbt", version, about = "Eigensystems of corner-modified banded block-Toeplitz matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel of (C - epsilon) for a finite problem document.
    Kernel {
        /// Path to a JSON problem document.
        input: String,
        /// Real part of the shift.
        #[arg(long, default_value_t = 0.0)]
        eps_re: f64,
        /// Imaginary part of the shift.
        #[arg(long, default_value_t = 0.0)]
        eps_im: f64,
        /// Also print the dense site-by-site expansion of each kernel vector.
        #[arg(long)]
        expand: bool,
    },
    /// Eigenvalue search for a finite problem document.
    Spectrum {
        input: String,
        /// Cross-check eigenvalue counts against the dense solver.
        #[arg(long)]
        oracle_check: bool,
        /// Override the search radius.
        #[arg(long)]
        radius: Option<f64>,
        /// Samples for the real-line scan.
        #[arg(long)]
        real_grid: Option<usize>,
        /// Samples per axis for the complex grid.
        #[arg(long)]
        disk_grid: Option<usize>,
    },
    /// Generalized eigenspace of a finite problem at a given eigenvalue.
    Geneig {
        input: String,
        #[arg(long, default_value_t = 0.0)]
        eps_re: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_im: f64,
    },
    /// Emit (or solve) an open Kitaev chain document.
    Kitaev {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        t: f64,
        /// Pairing amplitude; defaults to t (the solvable line).
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        n: usize,
        /// Solve the spectrum instead of printing the document.
        #[arg(long)]
        solve: bool,
    },
    /// Bound states of a semi-infinite problem document at a given shift.
    Semi {
        input: String,
        #[arg(long, default_value_t = 0.0)]
        eps_re: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_im: f64,
        /// Print the truncation of each bound state to this many sites.
        #[arg(long)]
        truncate: Option<usize>,
    },
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::SingularSymbol(_) => ExitCode::from(2),
        Error::NTooSmall { .. } => ExitCode::from(3),
        Error::SearchIncomplete { .. } => ExitCode::from(4),
        _ => ExitCode::from(1),
    }
}

fn load(path: &str) -> Result<ProblemDocument, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidSpec(format!("{path}: {e}")))?;
    ProblemDocument::from_json(&text)
}

fn cvec_json(v: &nalgebra::DVector<Complex64>) -> serde_json::Value {
    json!(v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Kernel {
            input,
            eps_re,
            eps_im,
            expand,
        } => {
            let spec = load(&input)?.finite_spec()?;
            let eps = Complex64::new(eps_re, eps_im);
            let (basis, bmat, vectors) = boundary::kernel_pipeline(&spec, eps)?;
            let out = json!({
                "epsilon": [eps.re, eps.im],
                "bulk_basis_size": basis.len(),
                "finite_support_size": basis.sigma,
                "boundary_matrix_smin": bmat.smallest_singular_value(),
                "kernel_dim": vectors.len(),
                "vectors": vectors.iter().map(|v| {
                    let mut entry = json!({ "alpha": cvec_json(&v.alpha) });
                    if expand {
                        entry["dense"] = cvec_json(&boundary::reconstruct(&basis, &v.alpha));
                    }
                    entry
                }).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(())
        }
        Command::Spectrum {
            input,
            oracle_check,
            radius,
            real_grid,
            disk_grid,
        } => {
            let doc = load(&input)?;
            let spec = doc.finite_spec()?;
            let mut config = SearchConfig {
                oracle_check,
                radius,
                hermitian: doc.hermitian,
                ..SearchConfig::default()
            };
            if let Some(g) = real_grid {
                config.real_grid = g;
            }
            if let Some(g) = disk_grid {
                config.disk_grid = g;
            }
            let result = eigensystem::eigenvalues(&spec, &config)?;
            let out = json!({
                "eigenvalues": result.eigenvalues.iter().map(|e| json!({
                    "epsilon": [e.epsilon.re, e.epsilon.im],
                    "geometric": e.geometric,
                    "algebraic": e.algebraic,
                    "singular_symbol": e.singular_symbol,
                })).collect::<Vec<_>>(),
                "singular_shifts": result.singular.iter()
                    .map(|e| [e.re, e.im]).collect::<Vec<_>>(),
                "trace": result.trace,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            if let Some((found, expected)) = result.incomplete {
                return Err(Error::SearchIncomplete { found, expected });
            }
            Ok(())
        }
        Command::Geneig {
            input,
            eps_re,
            eps_im,
        } => {
            let spec = load(&input)?.finite_spec()?;
            let eps = Complex64::new(eps_re, eps_im);
            let space = eigensystem::generalized_eigenspace(&spec, eps)?;
            let out = json!({
                "epsilon": [eps.re, eps.im],
                "kappa_max": space.kappa_max,
                "dims": space.dims,
                "vectors": space.vectors.iter().map(|v| json!({
                    "kappa": v.kappa,
                    "alpha": cvec_json(&v.alpha),
                })).collect::<Vec<_>>(),
                "dense_fallback": space.dense_vectors.is_some(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(())
        }
        Command::Kitaev {
            mu,
            t,
            delta,
            n,
            solve,
        } => {
            let params = KitaevParams {
                mu,
                t,
                delta: delta.unwrap_or(t),
            };
            let spec = models::kitaev_spec(&params, n)?;
            if solve {
                let config = SearchConfig {
                    hermitian: Some(true),
                    ..SearchConfig::default()
                };
                let result = eigensystem::eigenvalues(&spec, &config)?;
                let out = json!({
                    "params": { "mu": mu, "t": t, "delta": params.delta, "N": n },
                    "eigenvalues": result.eigenvalues.iter().map(|e| json!({
                        "epsilon": [e.epsilon.re, e.epsilon.im],
                        "geometric": e.geometric,
                        "quantization_residual":
                            models::quantization_residual(&params, n, e.epsilon),
                    })).collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                println!("{}", ProblemDocument::from_spec(&spec).to_json());
            }
            Ok(())
        }
        Command::Semi {
            input,
            eps_re,
            eps_im,
            truncate,
        } => {
            let spec = load(&input)?.semi_infinite_spec()?;
            let eps = Complex64::new(eps_re, eps_im);
            let (basis, states) = semiinfinite::bound_states(&spec, eps)?;
            let out = json!({
                "epsilon": [eps.re, eps.im],
                "decaying_basis_size": basis.len(),
                "marginal_roots": basis.marginal.iter()
                    .map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "bound_states": states.iter().map(|s| {
                    let mut entry = json!({
                        "alpha": cvec_json(&s.alpha),
                        "dominant_decay": s.dominant_decay,
                    });
                    if let Some(n) = truncate {
                        entry["truncation"] =
                            cvec_json(&semiinfinite::state_truncation(&basis, s, n));
                    }
                    entry
                }).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
