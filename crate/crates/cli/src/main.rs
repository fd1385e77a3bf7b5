use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vpiso_core::decider::{
    decide, enumerate_theta, parse_instance, presentation_invariants, theta_from_lifts, theta_system,
    DecideConfig, IsoInstance, Mode, Side, ThetaStream,
};
use vpiso_core::localsolve::{decide_local, Budget, LocalConfig, Overall};
use vpiso_core::malcev::{fingerprint, fingerprint_compare, Comparison};
use vpiso_core::sysbuild::{build_lie_system, find_lie_witness, parse_system, serialize_system, DiophantineSystem, Tag, Witness};
use vpiso_core::BigInt;

/// Exit status for unreadable or invalid input.
const INPUT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "vpiso", version, about = "Profinite isomorphism testing for virtually polycyclic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    #[value(name = "G")]
    G,
    #[value(name = "Gdag")]
    Gdag,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildMode {
    Full,
    Lie,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecideMode {
    Full,
    LieFirst,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance and print a summary.
    Parse { file: PathBuf },
    /// Invariants of the finite quotients of one side's lattice group.
    Fingerprint {
        file: PathBuf,
        #[arg(long, value_enum)]
        side: Option<SideArg>,
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 4, 8])]
        moduli: Vec<u64>,
        /// Compare both sides over the requested moduli admissible for
        /// both; exit 0 on a match and 1 on a divergence.
        #[arg(long, conflicts_with = "side")]
        compare: bool,
    },
    /// Write the polynomial system for one quotient isomorphism, or the
    /// bracket-transport system.
    Build {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        theta_index: usize,
        #[arg(long, default_value_t = 1)]
        height: u32,
        #[arg(long, value_enum, default_value = "full")]
        mode: BuildMode,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write a verified exact witness, when one is found.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Local solvability of a serialized system.
    Solve {
        system: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3, 5, 7])]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 6)]
        level: u32,
        #[arg(long, value_parser = parse_count, default_value = "10^7")]
        nodes: u64,
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// JSON object of variable names to integers, tried as an exact
        /// solution first.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Run both procedures and print the decision.
    Decide {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        height: u32,
        /// Defaults to the primes up to 97 and those dividing `n!`, the
        /// lattice denominators and the determinants of the constants.
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
        #[arg(long, default_value_t = 64)]
        slices: usize,
        #[arg(long, default_value_t = 8)]
        moduli_bound: u64,
        #[arg(long, value_enum, default_value = "lie-first")]
        mode: DecideMode,
        #[arg(long, default_value_t = 6)]
        level: u32,
        #[arg(long, value_parser = parse_count, default_value = "10^7")]
        nodes: u64,
    },
}

/// Accepts plain integers and `a^b`.
fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    match s.split_once('^') {
        Some((base, exp)) => {
            let base: u64 = base.parse().map_err(|e| format!("bad base: {e}"))?;
            let exp: u32 = exp.parse().map_err(|e| format!("bad exponent: {e}"))?;
            base.checked_pow(exp).ok_or_else(|| "count overflows u64".to_string())
        }
        None => s.parse().map_err(|e| format!("{e}")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<IsoInstance> {
    Ok(parse_instance(&read(path)?)?)
}

/// Pretty JSON on stdout; a closed pipe is not an error.
fn print(v: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn side_summary(side: &Side) -> Value {
    let lattice = side.group.lattice();
    json!({
        "n": side.n,
        "generators": side.gen_names,
        "relators": side.relators.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "subgroup_words": side.n_words.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "lattice_rank": lattice.rank(),
        "lattice_declared": side.group.lattice_declared(),
        "abelianization": presentation_invariants(side).to_string(),
        "quotient": side.quotient.invariants.to_string(),
    })
}

fn stream(inst: &IsoInstance, height: u32) -> Result<ThetaStream> {
    Ok(match &inst.lifts {
        Some(lifts) => theta_from_lifts(&inst.g, &inst.gdag, lifts)?,
        None => enumerate_theta(&inst.g, &inst.gdag, height, inst.theta.as_ref())?,
    })
}

fn witness_json(system: &DiophantineSystem, w: &Witness) -> BTreeMap<String, String> {
    w.named(system).into_iter().map(|(k, v)| (k, v.to_string())).collect()
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Parse { file } => {
            let inst = load_instance(&file)?;
            print(&json!({
                "G": side_summary(&inst.g),
                "Gdag": side_summary(&inst.gdag),
                "fitting_hypothesis_declared": inst.profinite_fitting,
                "fitting_hypothesis_holds": inst.hypothesis_holds(),
                "lifts_declared": inst.lifts.is_some(),
                "theta_declared": inst.theta.is_some(),
            }))?;
            Ok(0)
        }
        Command::Fingerprint {
            file,
            side,
            moduli,
            compare,
        } => {
            let inst = load_instance(&file)?;
            let bound = moduli.iter().copied().max().unwrap_or(0);
            if compare {
                let (a, b) = (inst.g.group.admissible_moduli(bound)?, inst.gdag.group.admissible_moduli(bound)?);
                let common: Vec<u64> = moduli.iter().copied().filter(|m| a.contains(m) && b.contains(m)).collect();
                let fg = fingerprint(&inst.g.group, &common)?;
                let fd = fingerprint(&inst.gdag.group, &common)?;
                let cmp = fingerprint_compare(&fg, &fd)?;
                let code = match cmp {
                    Comparison::Match => 0,
                    Comparison::Diverges(_) => 1,
                };
                print(&json!({
                    "moduli": common,
                    "comparison": cmp,
                    "conditional_on_fitting_hypothesis": true,
                    "fitting_hypothesis_holds": inst.hypothesis_holds(),
                    "G": fg,
                    "Gdag": fd,
                }))?;
                return Ok(code);
            }
            let side = match side.unwrap_or(SideArg::G) {
                SideArg::G => &inst.g,
                SideArg::Gdag => &inst.gdag,
            };
            let admissible = side.group.admissible_moduli(bound)?;
            if let Some(m) = moduli.iter().find(|m| !admissible.contains(m)) {
                bail!("modulus {m} is not admissible for [{}]", side.label);
            }
            print(&fingerprint(&side.group, &moduli)?)?;
            Ok(0)
        }
        Command::Build {
            file,
            theta_index,
            height,
            mode,
            output,
            witness,
        } => {
            let inst = load_instance(&file)?;
            let (system, found, theta) = match mode {
                BuildMode::Lie => {
                    let (la, lb) = (inst.g.group.lattice(), inst.gdag.group.lattice());
                    let sys = build_lie_system(la, lb)?;
                    let w = find_lie_witness(&sys, la, lb);
                    (sys, w, Value::Null)
                }
                BuildMode::Full => {
                    let theta = stream(&inst, height)?
                        .nth(theta_index)
                        .ok_or_else(|| anyhow!("no quotient isomorphism with index {theta_index}"))?;
                    let data = theta_system(&inst, &theta)?.map_err(|m| anyhow!("lifts do not specialize: {m}"))?;
                    (data.system, data.witness, serde_json::to_value(&theta)?)
                }
            };
            fs::write(&output, serialize_system(&system)).with_context(|| format!("writing {}", output.display()))?;
            if let (Some(path), Some(w)) = (&witness, &found) {
                fs::write(path, serde_json::to_string_pretty(&witness_json(&system, w))?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let counts: BTreeMap<&str, usize> = Tag::ALL
                .into_iter()
                .map(|t| (t.as_str(), system.count(t)))
                .filter(|&(_, c)| c > 0)
                .collect();
            print(&json!({
                "output": output.display().to_string(),
                "theta": theta,
                "variables": system.variables.len(),
                "equations": system.polys.len(),
                "by_tag": counts,
                "max_degree": system.max_degree(),
                "good_case": system.meta.good,
                "witness_found": found.is_some(),
            }))?;
            Ok(0)
        }
        Command::Solve {
            system,
            primes,
            level,
            nodes,
            points,
            witness,
        } => {
            let sys = parse_system(&read(&system)?)?;
            let mut hints = Vec::new();
            if let Some(path) = witness {
                let raw: BTreeMap<String, Value> = serde_json::from_str(&read(&path)?)?;
                let named = raw
                    .into_iter()
                    .map(|(k, v)| {
                        let text = match v {
                            Value::String(s) => s,
                            Value::Number(n) => n.to_string(),
                            other => bail!("{k}: expected an integer, got {other}"),
                        };
                        let x: BigInt = text.parse().with_context(|| format!("{k}: not an integer"))?;
                        Ok((k, x))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                hints.push(Witness::from_named(&sys, &named)?);
            }
            let config = LocalConfig {
                budget: Budget {
                    max_level: level,
                    max_nodes: nodes,
                    max_points: points,
                },
                hints,
            };
            let report = decide_local(&sys, &primes, &config)?;
            print(&report)?;
            Ok(match report.overall {
                Overall::LocallySolvableOnSet => 0,
                Overall::NotLocallySolvable { .. } => 1,
                Overall::Inconclusive => 2,
            })
        }
        Command::Decide {
            file,
            height,
            primes,
            slices,
            moduli_bound,
            mode,
            level,
            nodes,
        } => {
            let inst = load_instance(&file)?;
            let config = DecideConfig {
                height,
                primes,
                moduli_bound,
                slices,
                budget: Budget {
                    max_level: level,
                    max_nodes: nodes,
                    ..Budget::default()
                },
                mode: match mode {
                    DecideMode::Full => Mode::Full,
                    DecideMode::LieFirst => Mode::LieFirst,
                },
            };
            let decision = decide(&inst, &config)?;
            print(&decision)?;
            Ok(decision.verdict.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("10^7"), Ok(10_000_000));
        assert_eq!(parse_count("1_000"), Ok(1000));
        assert_eq!(parse_count("42"), Ok(42));
        assert!(parse_count("2^64").is_err());
        assert!(parse_count("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
