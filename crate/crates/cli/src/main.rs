mod config;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use genuslab::biquadratic::{genus_field, BiquadraticField, FieldRecord};
use genuslab::brauer::class_number_biquadratic;
use genuslab::census::{
    census, coefficient_experiment, density_report, euler_constant, sathe_selberg_count, verdict_census,
    CensusOptions, CensusReport, SatheSelberg,
};
use genuslab::euclid::{euclidean_verdict, Verdict};
use genuslab::par::{self, Strategy};
use genuslab::quadratic::{class_number_forms, discriminant, ClassNumberCache};
use genuslab::table::reproduce_table;
use genuslab::Error;

use config::Config;

#[derive(Parser, Debug)]
#[command(name = "genuslab", version, about = "Genus fields, class numbers and Euclidean-ideal verdicts for odd real biquadratic fields")]
struct Cli {
    /// Directory for the persistent class-number cache
    #[arg(long, global = true, env = "GENUSLAB_CACHE")]
    cache_dir: Option<PathBuf>,
    /// Worker threads for census runs
    #[arg(long, global = true, env = "GENUSLAB_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Largest |D| checked against the reduced-forms class number
    #[arg(long, global = true, value_parser = parse_bound)]
    oracle_bound: Option<u64>,
    /// Largest discriminant for full verdict censuses
    #[arg(long, global = true, value_parser = parse_bound)]
    verdict_bound: Option<u64>,
    /// Working precision of the first class-number escalation step
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(64..))]
    precision_bits: Option<u64>,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full report for Q(sqrt d1, sqrt d2)
    Field {
        #[arg(long, allow_negative_numbers = true)]
        d1: i64,
        #[arg(long, allow_negative_numbers = true)]
        d2: i64,
    },
    /// Recompute the embedded table of exceptional fields
    Table,
    /// Count fields with discriminant at most X
    Census {
        #[arg(long, value_parser = parse_bound)]
        max_disc: u64,
        /// Append a CSV row (with header for a new file)
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Resume file for long runs
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Run the discriminant and genus-rank identities on the fields
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        sequential: bool,
    },
    /// Truncated Euler product and the candidate leading coefficients
    Constants {
        #[arg(long, value_parser = parse_bound, default_value = "1000000")]
        prime_bound: u64,
    },
    /// Squarefree integers with n prime factors against the main term
    Selberg {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = parse_bound)]
        limit: u64,
    },
    /// Fraction of fields with omega(Delta) <= 4 per decade
    Density {
        #[arg(long, value_parser = parse_bound)]
        max_disc: u64,
    },
    /// S(X) / (sqrt X log^2 X) on a grid of bounds
    Coefficients {
        #[arg(long, value_delimiter = ',', value_parser = parse_bound, default_value = "1e8,1e10,1e12")]
        grid: Vec<u64>,
    },
    /// Verdicts for every field up to the verdict bound
    Verdicts {
        #[arg(long, value_parser = parse_bound)]
        max_disc: Option<u64>,
    },
}

/// Accepts `123`, `1e12` and `10^12`.
fn parse_bound(s: &str) -> Result<u64, String> {
    let pow = |base: &str, exp: &str| -> Option<u64> {
        let b: u64 = base.parse().ok()?;
        let e: u32 = exp.parse().ok()?;
        b.checked_pow(e)
    };
    let v = if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| format!("invalid number {s:?}"))?;
        pow("10", e).and_then(|p| p.checked_mul(m))
    } else if let Some((b, e)) = s.split_once('^') {
        pow(b, e)
    } else {
        s.parse().ok()
    };
    match v {
        Some(0) => Err("must be positive".into()),
        Some(v) => Ok(v),
        None => Err(format!("invalid number {s:?}")),
    }
}

fn resolve(cli: &Cli) -> Config {
    let mut cfg = Config::default();
    if let Some(d) = &cli.cache_dir {
        cfg.cache_dir = Some(d.clone());
    }
    if let Some(t) = cli.threads {
        cfg.threads = t as usize;
    }
    if let Some(b) = cli.oracle_bound {
        cfg.oracle_bound = b;
    }
    if let Some(b) = cli.verdict_bound {
        cfg.verdict_bound = b;
    }
    if let Some(b) = cli.precision_bits {
        cfg.precision_bits = b as usize;
    }
    cfg
}

#[derive(Serialize)]
struct FieldReport {
    #[serde(flatten)]
    record: FieldRecord,
    genus_field_degree: u64,
    subfield_class_numbers: [u64; 3],
    #[serde(rename = "Q")]
    unit_index: u8,
    #[serde(rename = "h_K")]
    h_k: u64,
    oracle_checked: usize,
    verdict: Verdict,
}

fn field_report(d1: i64, d2: i64, cfg: &Config, cache: &ClassNumberCache) -> Result<FieldReport, Error> {
    let k = BiquadraticField::from_radicands(d1, d2)?;
    let record = FieldRecord::new(&k)?;
    let brauer = class_number_biquadratic(&k, cache)?;
    let mut oracle_checked = 0;
    for (&s, &h) in k.subfields().iter().zip(&brauer.subfield_class_numbers) {
        let d = discriminant(s as i64)?;
        if d.unsigned_abs() <= cfg.oracle_bound {
            let forms = class_number_forms(d, cfg.oracle_bound)?;
            if forms != h {
                return Err(Error::InternalInconsistency(format!("D = {d}: analytic {h}, forms {forms}")));
            }
            oracle_checked += 1;
        }
    }
    Ok(FieldReport {
        record,
        genus_field_degree: genus_field(&k)?.degree(),
        subfield_class_numbers: brauer.subfield_class_numbers,
        unit_index: brauer.unit_index.q,
        h_k: brauer.h_k,
        oracle_checked,
        verdict: euclidean_verdict(&k, cache)?,
    })
}

fn join<T: Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn yes_no(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

fn print_field(r: &FieldReport) {
    let f = &r.record;
    println!("field: Q(sqrt {}, sqrt {})", f.d1, f.d2);
    println!("triple: {}", join(&f.triple));
    println!("c: {}", f.c);
    println!("discriminant: {}", f.discriminant);
    println!("subfields: {}", join(&f.subfields));
    println!("genus generators: {}", join(&f.genus_generators));
    println!("genus field degree: {}", r.genus_field_degree);
    println!("genus number: {}", f.genus_number);
    println!("L generators: {}", join(&f.l_generators));
    let form = serde_json::to_value(f.form).ok().and_then(|v| v.as_str().map(String::from));
    println!("form: {}", form.as_deref().unwrap_or("none"));
    println!("shared prime: {}", yes_no(Some(f.shared_prime)));
    println!("subfield class numbers: {}", join(&r.subfield_class_numbers));
    println!("unit index: {}", r.unit_index);
    println!("h_K: {}", r.h_k);
    println!("oracle checked: {}", r.oracle_checked);
    println!("verdict: {:?}", r.verdict.status);
    println!("hilbert abelian: {}", yes_no(r.verdict.hilbert_abelian));
    println!("exceptional pattern: {}", yes_no(r.verdict.exceptional_pattern));
    println!("reasons: {}", join(&r.verdict.reasons));
}

fn print_census(r: &CensusReport) {
    println!("X: {}", r.x);
    println!("total: {}", r.total);
    for (w, c) in &r.by_omega {
        println!("omega {w}: {c} (genus number {})", 1u64 << (w - 2));
    }
    println!("omega <= 4: {} ({:.6})", r.euclid_eligible, r.eligible_fraction);
    for d in &r.by_decade {
        println!("decade 10^{}: {} fields, omega <= 4 fraction {:.6}", d.decade, d.total, d.eligible_fraction);
    }
    if r.identity_checks > 0 {
        println!("identity checks: {}", r.identity_checks);
    }
}

fn emit<T: Serialize>(value: &T) -> Result<(), Error> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn write_csv(path: &PathBuf, r: &CensusReport) -> Result<(), Error> {
    use std::io::Write;
    let max_omega = r.max_omega();
    let fresh = !path.exists();
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{}", CensusReport::csv_header(max_omega))?;
    }
    writeln!(f, "{}", r.csv_row(max_omega))?;
    Ok(())
}

#[derive(Serialize)]
struct SelbergReport {
    #[serde(flatten)]
    counts: SatheSelberg,
    main_term_formula: &'static str,
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = resolve(&cli);
    par::init_threads(cfg.threads);
    let strategy = Strategy::default();
    match cli.command {
        Command::Field { d1, d2 } => {
            let cache = cfg.open_cache()?;
            let r = field_report(d1, d2, &cfg, &cache)?;
            if cli.json {
                emit(&r)?;
            } else {
                print_field(&r);
            }
        }
        Command::Table => {
            let cache = cfg.open_cache()?;
            let rows = reproduce_table(&cache)?;
            let matched = rows.iter().filter(|r| r.matches).count();
            if cli.json {
                emit(&rows)?;
            } else {
                println!("   q    r    s  h_K  h1 h2 h3  status");
                for r in &rows {
                    let c = r.computed;
                    println!(
                        "{:>4} {:>4} {:>4} {:>4}  {:>2} {:>2} {:>2}  {}",
                        c.q, c.r, c.s, c.h_k, c.h[0], c.h[1], c.h[2],
                        if r.matches { "ok" } else { "MISMATCH" }
                    );
                }
                println!("{matched}/{} rows match", rows.len());
            }
            if matched != rows.len() {
                return Err(Error::InternalInconsistency(format!("{} table rows differ", rows.len() - matched)));
            }
        }
        Command::Census { max_disc, csv, checkpoint, verify, sequential } => {
            let strategy = if sequential { Strategy::Sequential } else { strategy };
            let start = std::time::Instant::now();
            let r = census(max_disc, &CensusOptions { strategy, verify, checkpoint })?;
            eprintln!("census took {:.3}s", start.elapsed().as_secs_f64());
            if let Some(path) = &csv {
                write_csv(path, &r)?;
            }
            if cli.json {
                emit(&r)?;
            } else {
                print_census(&r);
            }
        }
        Command::Constants { prime_bound } => {
            let e = euler_constant(prime_bound);
            if cli.json {
                emit(&e)?;
            } else {
                println!("prime bound: {}", e.prime_bound);
                println!("product over 2 < p <= P: {:.12}", e.truncated_product);
                println!("product including p = 2: {:.12}", e.truncated_product_all);
                println!("relative tail bound: {:.3e}", e.tail_bound);
                for c in &e.candidates {
                    println!("{}: {:.10e}", c.name, c.value);
                }
            }
        }
        Command::Selberg { n, limit } => {
            if n == 0 || limit < 100 {
                return Err(Error::InvalidArgument("selberg needs n >= 1 and limit >= 100".into()));
            }
            let s = sathe_selberg_count(limit, n, strategy);
            let r = SelbergReport { counts: s, main_term_formula: "N / log N * (log log N)^(n-1) / (n-1)!" };
            if cli.json {
                emit(&r)?;
            } else {
                let s = &r.counts;
                println!("squarefree m <= {} with omega(m) = {}: {}", s.n_bound, s.n, s.exact);
                println!("main term {}: {:.3}", r.main_term_formula, s.main_term);
                println!("ratio: {:.6}", s.ratio);
            }
        }
        Command::Density { max_disc } => {
            let r = density_report(max_disc, &CensusOptions { strategy, ..Default::default() })?;
            if cli.json {
                emit(&r)?;
            } else {
                for d in &r.by_decade {
                    println!("decade 10^{}: {} fields, omega <= 4 fraction {:.6}", d.decade, d.total, d.eligible_fraction);
                }
            }
        }
        Command::Coefficients { grid } => {
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument("grid must be strictly ascending".into()));
            }
            let r = coefficient_experiment(&grid, &CensusOptions { strategy, ..Default::default() })?;
            if cli.json {
                emit(&r)?;
            } else {
                for row in &r.rows {
                    println!("X = {}: S = {}, S/(sqrt X log^2 X) = {:.6e}", row.x, row.total, row.ratio);
                }
                for c in &r.candidates {
                    println!("candidate {}: {:.6e}", c.name, c.value);
                }
                if let Some(f) = &r.fit {
                    println!("fit S/sqrt X = a L^2 + b L + c: a = {:.6e}, b = {:.6e}, c = {:.6e}", f.a, f.b, f.c);
                }
                println!("trend: {}", r.trend);
                println!("nearest candidate: {}", r.nearest_candidate);
                println!("favoured prefactor: {}", if r.favours_7_over_1920 { "7/1920" } else { "7/768" });
            }
        }
        Command::Verdicts { max_disc } => {
            let cache = cfg.open_cache()?;
            let bound = max_disc.unwrap_or(cfg.verdict_bound);
            let v = verdict_census(bound, &cache, strategy)?;
            if cli.json {
                emit(&v)?;
            } else {
                println!("fields with Delta <= {}: {}", v.bound, v.fields);
                for (s, c) in &v.by_status {
                    println!("{s:?}: {c}");
                }
                for msg in &v.violations {
                    println!("violation: {msg}");
                }
            }
            if !v.violations.is_empty() {
                return Err(Error::InternalInconsistency(format!("{} verdict violations", v.violations.len())));
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_internal() || matches!(e, Error::CacheConflict { .. }) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
