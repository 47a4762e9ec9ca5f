//! Batch front end: catalogue access, whole-matrix analysis with JSON
//! reports, tensor products, scrambling, Fourier decomposition, magic-square
//! groups, and the M_q family commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hadamaq::decomp::{decompose, verify_decomposition};
use hadamaq::group::{fingerprint, generate, GroupElement, GENERATE_CAP};
use hadamaq::hadamard::{read_chm, write_chm, HadamardMatrix};
use hadamaq::mq::{
    classify, factorization_check, factorization_index_bound, generators, predicted_group,
    realized_group, MqCase, Sign,
};
use hadamaq::report::{analyze, file_descriptor, AnalyzeOptions};
use hadamaq::square::read_msq;
use hadamaq::{catalogue, EquivalenceWitness, Phase};

#[derive(Parser)]
#[command(
    name = "hadamaq",
    version,
    about = "Quantum-permutation invariants of complex Hadamard matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List or emit the named catalogue matrices
    Catalogue {
        #[command(subcommand)]
        action: CatalogueAction,
    },
    /// Run the full analysis pipeline on a matrix
    Analyze {
        /// A .chm file path or a catalogue spec such as fourier:6
        input: String,
        /// Write the JSON report here ("-" for standard output)
        #[arg(long)]
        json: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 48)]
        max_order: u64,
        #[arg(long, default_value_t = 16)]
        max_size: usize,
        /// Include wall-clock timings (makes the JSON non-reproducible)
        #[arg(long)]
        timings: bool,
    },
    /// Tensor product of two matrices, written as .chm
    Tensor {
        a: String,
        b: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Decompose a matrix as a tensor product of Fourier matrices
    Decompose {
        input: String,
        #[arg(long, default_value_t = 48)]
        max_order: u64,
    },
    /// Apply a seeded random equivalence witness
    Scramble {
        input: String,
        #[arg(long)]
        seed: u64,
        /// Order of the random roots of unity used as phases
        #[arg(long, default_value_t = 24)]
        phase_order: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify and verify the 4x4 family M_q
    Mq {
        /// The parameter as k/l, meaning e^{2*pi*i*k/l}
        #[arg(long)]
        q: String,
        /// Run every factorization check and both signs
        #[arg(long)]
        check_all: bool,
    },
    /// Magic-square commands
    Square {
        #[command(subcommand)]
        action: SquareAction,
    },
}

#[derive(Subcommand)]
enum CatalogueAction {
    /// Print the recognized names and parameter syntax
    List,
    /// Write a catalogue matrix as .chm
    Emit {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SquareAction {
    /// Group generated by the rows of a .msq file
    Group { file: PathBuf },
}

/// Failures carry the exit code: 1 for validation failures, 2 for usage.
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }

    fn failure(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hadamaq: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Loads a matrix from a file path or a catalogue spec string, returning it
/// with a report descriptor.
fn load_input(input: &str) -> Result<(HadamardMatrix, String), CliError> {
    let path = Path::new(input);
    if path.exists() {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::failure(format!("cannot read {input}: {e}")))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::failure(format!("{input} is not UTF-8 text")))?;
        let h = read_chm(&text).map_err(|e| CliError::failure(format!("{input}: {e}")))?;
        Ok((h, file_descriptor(input, &bytes)))
    } else {
        let h = catalogue::from_spec(input).map_err(|e| {
            CliError::usage(format!("{e}; expected a file path or a catalogue spec"))
        })?;
        Ok((h, input.to_string()))
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, contents)
            .map_err(|e| CliError::failure(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Catalogue { action } => match action {
            CatalogueAction::List => {
                for name in catalogue::names() {
                    println!("{name}");
                }
                Ok(())
            }
            CatalogueAction::Emit { name, output } => {
                let h = catalogue::from_spec(&name).map_err(|e| CliError::usage(e.to_string()))?;
                write_output(output.as_deref(), &write_chm(&h))
            }
        },
        Command::Analyze {
            input,
            json,
            tol,
            max_order,
            max_size,
            timings,
        } => {
            let (h, descriptor) = load_input(&input)?;
            let options = AnalyzeOptions {
                tol,
                max_order,
                max_size,
                timings,
            };
            let report = analyze(&h, &descriptor, &options);
            println!("{}", summary(&report));
            if let Some(target) = json {
                let body = format!("{}\n", report.to_json());
                if target == "-" {
                    print!("{body}");
                } else {
                    write_output(Some(Path::new(&target)), &body)?;
                }
            }
            if !report.hadamard.valid || !report.errors.is_empty() {
                return Err(CliError::failure("analysis reported problems (see above)"));
            }
            Ok(())
        }
        Command::Tensor { a, b, output } => {
            let (ha, _) = load_input(&a)?;
            let (hb, _) = load_input(&b)?;
            let t = hadamaq::tensor(&ha, &hb);
            write_output(Some(&output), &write_chm(&t))
        }
        Command::Decompose { input, max_order } => {
            let (h, descriptor) = load_input(&input)?;
            if !h.is_hadamard(hadamaq::DEFAULT_TOL) {
                return Err(CliError::failure(format!("{descriptor} is not Hadamard")));
            }
            match decompose(&h, max_order) {
                Ok(d) => {
                    let outcome = verify_decomposition(&h, &d);
                    println!(
                        "{descriptor}: factors {:?}, witness {}, residual {:e}",
                        d.factor_sizes,
                        if outcome.pass { "verified" } else { "FAILED" },
                        outcome.max_residual
                    );
                    if outcome.pass {
                        Ok(())
                    } else {
                        Err(CliError::failure("witness verification failed"))
                    }
                }
                Err(e) => Err(CliError::failure(format!("{descriptor}: {e}"))),
            }
        }
        Command::Scramble {
            input,
            seed,
            phase_order,
            output,
        } => {
            if phase_order == 0 {
                return Err(CliError::usage("--phase-order must be at least 1"));
            }
            let (h, _) = load_input(&input)?;
            let witness = EquivalenceWitness::random(h.n(), seed, phase_order);
            let scrambled = witness.apply(&h).expect("witness built for this size");
            write_output(output.as_deref(), &write_chm(&scrambled))
        }
        Command::Mq { q, check_all } => run_mq(&q, check_all),
        Command::Square { action } => match action {
            SquareAction::Group { file } => {
                let text = std::fs::read_to_string(&file).map_err(|e| {
                    CliError::failure(format!("cannot read {}: {e}", file.display()))
                })?;
                let square = read_msq(&text).map_err(|e| CliError::failure(format!("{e}")))?;
                let gens: Vec<GroupElement> = square
                    .rows_as_permutations()
                    .into_iter()
                    .map(GroupElement::Perm)
                    .collect();
                let closure =
                    generate(&gens, GENERATE_CAP).map_err(|e| CliError::failure(e.to_string()))?;
                let fp = fingerprint(&closure);
                println!(
                    "order {}, abelian {}, center order {}, label {}",
                    fp.order, fp.abelian, fp.center_order, fp.label
                );
                Ok(())
            }
        },
    }
}

fn parse_q(q: &str) -> Result<Phase, CliError> {
    let (k, l) = q
        .split_once('/')
        .ok_or_else(|| CliError::usage(format!("q must be k/l, got `{q}`")))?;
    let k: i64 = k
        .parse()
        .map_err(|_| CliError::usage(format!("bad numerator `{k}`")))?;
    let l: u64 = l
        .parse()
        .map_err(|_| CliError::usage(format!("bad order `{l}`")))?;
    if l == 0 {
        return Err(CliError::usage("order must be positive"));
    }
    if l > 1_000_000 {
        return Err(CliError::usage("order is limited to 1000000"));
    }
    Ok(Phase::root(k, l))
}

fn run_mq(q: &str, check_all: bool) -> Result<(), CliError> {
    let q = parse_q(q)?;
    let case = classify(&q);
    let predicted = predicted_group(&case);
    match &case {
        MqCase::Finite { n, s, m, .. } => {
            println!("case {}: n = {n} = 2^{s}*{m}", case.case_id());
        }
        MqCase::Infinite { .. } => {
            println!("case infinite: q^2 has infinite order");
            println!("predicted group {predicted} (symbolic; no closure attempted)");
            return Ok(());
        }
    }
    println!(
        "predicted group {predicted} (order {})",
        predicted.order().expect("finite")
    );

    let gens = generators(&case).expect("finite case");
    if gens.sign_flipped {
        println!("q replaced by -q for the construction");
    }
    let realization = realized_group(&case).map_err(|e| CliError::failure(e.to_string()))?;
    println!(
        "realized order {}, label {}, abelian {}, center order {}",
        realization.fingerprint.order,
        realization.fingerprint.label,
        realization.fingerprint.abelian,
        realization.fingerprint.center_order
    );

    if check_all {
        let bound = factorization_index_bound(&gens.adjusted_q);
        let mut failures = 0usize;
        let mut worst = 0.0f64;
        for k in 0..bound {
            for sign in [Sign::Plus, Sign::Minus] {
                let check = factorization_check(&case, k, sign)
                    .map_err(|e| CliError::failure(e.to_string()))?;
                worst = worst.max(check.residual);
                if !check.pass {
                    failures += 1;
                    println!(
                        "factorization k={k} sign={sign:?}: FAIL (residual {:e})",
                        check.residual
                    );
                }
            }
        }
        if failures == 0 {
            println!(
                "all {} factorization checks pass (max residual {:e})",
                2 * bound,
                worst
            );
        } else {
            return Err(CliError::failure(format!(
                "{failures} factorization checks failed"
            )));
        }
    }
    Ok(())
}

fn summary(report: &hadamaq::AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "input:         {} (n={}, {})",
        report.input.descriptor, report.input.n, report.input.mode
    );
    let _ = writeln!(
        out,
        "hadamard:      {}",
        if report.hadamard.valid {
            "valid"
        } else {
            "INVALID"
        }
    );
    if let Some(level) = &report.butson_level {
        let text = match level {
            hadamaq::report::ButsonSection::Finite(l) => l.to_string(),
            hadamaq::report::ButsonSection::Infinite(s) => s.clone(),
        };
        let _ = writeln!(out, "butson level:  {text}");
    }
    if let Some(mu) = &report.magic_unitary {
        let _ = writeln!(
            out,
            "magic unitary: {}",
            if mu.valid { "valid" } else { "INVALID" }
        );
    }
    if let Some(c) = &report.commutation {
        let _ = writeln!(
            out,
            "commutation:   {} (max norm {:e})",
            c.flag, c.max_norm.0
        );
    }
    if let Some(g) = &report.group {
        let _ = writeln!(
            out,
            "group:         order {}, label {}, abelian {}",
            g.order, g.label, g.abelian
        );
    }
    if let Some(d) = &report.decomposition {
        let _ = writeln!(
            out,
            "decomposition: factors {:?}, {}",
            d.factor_sizes,
            if d.verified {
                "verified"
            } else {
                "NOT verified"
            }
        );
    }
    for e in &report.errors {
        let _ = writeln!(out, "error:         {e}");
    }
    out.trim_end().to_string()
}
