//! `pairvol` command line: exact invariants of decorated resolution graphs,
//! printed as `key = value` lines.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::One;

use pairvol::classify0::{
    enumerate_234_weights, enumerate_star3_types, halfweight_lc_determinants, match_case, star3_census,
    write_census_csv, CensusBounds, Vol0Match,
};
use pairvol::extremal::{rdp_star_search, write_search_csv, SearchBounds};
use pairvol::pairs::{self, drop_zero_arrows};
use pairvol::par::Mode;
use pairvol::random;
use pairvol::star::{detect_star, lct_star, star_pcp, Detection};
use pairvol::{DecoratedGraph, Rat};

const EXIT_DOMAIN: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Domain(#[from] pairvol::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "pairvol", version, about = "Exact invariants of surface and orbifold pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Resolution {
    /// Put arrows on their own end curves first (the default).
    #[arg(long, overrides_with = "raw")]
    normalize: bool,
    /// Use the graph exactly as given.
    #[arg(long, overrides_with = "normalize")]
    raw: bool,
    /// Compute on both the given and the normalized graph and require agreement.
    #[arg(long)]
    check: bool,
    /// Remove arrows with coefficient 0 before anything else.
    #[arg(long)]
    drop_zero_arrows: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a graph file.
    Validate { path: PathBuf },
    /// -P·P of K + E + Σ c_i C_i.
    Pcp {
        path: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
    /// Volume, -P·P of the opposite pair.
    Volume {
        path: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
    /// Discrepancies and log canonicity.
    Classify {
        path: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
    /// Log canonical threshold of the reduced curve.
    Lct {
        path: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
    /// Star invariants and the closed form for -P·P.
    Star {
        path: PathBuf,
        #[command(flatten)]
        res: Resolution,
    },
    /// Volume-0 case of an orbifold pair.
    Vol0 { path: PathBuf },
    /// Minimum positive volume over orbifold stars on rational double points.
    SearchMin {
        /// Bounds as `m=7,n=12,nprime=12,d=6`.
        #[arg(long, default_value_t = SearchBounds::default())]
        bounds: SearchBounds,
        /// Also write every configuration as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Volume-0 lists and the exhaustive three-string census.
    Census {
        /// Largest k listed for the three-string types.
        #[arg(long, default_value_t = 100)]
        max_k: u64,
        /// Bounds as `m=8,n=8,d=10`.
        #[arg(long, default_value = "m=8,n=8,d=10", value_parser = parse_census_bounds)]
        bounds: CensusBounds,
        /// Write the volume-0 rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Random blow-up invariance of -P·P and volume.
    Invariance {
        /// Pair to blow up; random pairs when omitted.
        path: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: u32,
    },
}

fn parse_census_bounds(s: &str) -> std::result::Result<CensusBounds, String> {
    let mut b = CensusBounds::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or(format!("expected key=value, got `{part}`"))?;
        let bad = |_| format!("bad value in `{part}`");
        match key.trim() {
            "m" => b.max_m = value.trim().parse().map_err(bad)?,
            "n" => b.max_n = value.trim().parse().map_err(bad)?,
            "d" => b.max_d = value.trim().parse().map_err(bad)?,
            k => return Err(format!("unknown bound `{k}`")),
        }
    }
    if b.max_m < 1 || b.max_n < 1 || b.max_d < 1 {
        return Err("bounds must be positive".into());
    }
    Ok(b)
}

fn mode(sequential: bool) -> Mode {
    if sequential {
        Mode::Sequential
    } else {
        Mode::Parallel
    }
}

/// Collects `key = value` lines.
#[derive(Default)]
struct Report(String);

impl Report {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.0, "{key} = {value}").unwrap();
    }
}

fn load(path: &Path) -> Result<DecoratedGraph> {
    let text = std::fs::read_to_string(path)?;
    let g = DecoratedGraph::parse(&text)?;
    g.validate()?;
    Ok(g)
}

fn normalized(g: &DecoratedGraph) -> Result<DecoratedGraph> {
    match g.normalize_minimal_orbifold() {
        Ok(h) => Ok(h),
        Err(pairvol::Error::ExceptionalCase) => Ok(g.clone()),
        Err(e) => Err(e.into()),
    }
}

/// Applies the resolution flags, computing on the raw graph as well under
/// `--check`.
fn resolved<T: PartialEq + std::fmt::Display>(
    g: &DecoratedGraph,
    res: Resolution,
    out: &mut Report,
    f: impl Fn(&DecoratedGraph) -> pairvol::Result<T>,
) -> Result<T> {
    let g = if res.drop_zero_arrows { drop_zero_arrows(g) } else { g.clone() };
    let main = if res.raw { g.clone() } else { normalized(&g)? };
    let value = f(&main)?;
    if res.check {
        let other = if res.raw { normalized(&g)? } else { g.clone() };
        let again = f(&other)?;
        if again != value {
            return Err(pairvol::Error::CertificateFailure(format!("normalized {value} but raw {again}")).into());
        }
        out.put("check", "agree");
    }
    Ok(value)
}

fn echo_arrows(g: &DecoratedGraph, out: &mut Report, opposite: bool) {
    for a in &g.arrows {
        let c = a.weight.c();
        if let Some(n) = a.weight.orbifold() {
            out.put(&format!("arrow.{}.n", a.id), n);
        }
        out.put(&format!("arrow.{}.c", a.id), &c);
        if opposite {
            out.put(&format!("arrow.{}.cbar", a.id), Rat::one() - c);
        }
    }
}

fn not_a_star(msg: &str) -> CliError {
    pairvol::Error::PreconditionViolated(msg.into()).into()
}

fn run(cli: Cli) -> Result<String> {
    let mut out = Report::default();
    match cli.command {
        Command::Validate { path } => {
            let g = load(&path)?;
            out.put("valid", true);
            out.put("vertices", g.vertices.len());
            out.put("edges", g.edges.iter().map(|e| e.mult).sum::<u32>());
            out.put("arrows", g.arrows.len());
            out.put("minimal_orbifold_form", g.is_minimal_orbifold_form());
        }
        Command::Pcp { path, res } => {
            let g = load(&path)?;
            echo_arrows(&g, &mut out, false);
            let v = resolved(&g, res, &mut out, pairs::pcp)?;
            out.put("pcp", v);
        }
        Command::Volume { path, res } => {
            let g = load(&path)?;
            let shown = if res.drop_zero_arrows { drop_zero_arrows(&g) } else { g.clone() };
            echo_arrows(&shown, &mut out, true);
            let v = resolved(&g, res, &mut out, pairs::volume)?;
            out.put("volume", v);
        }
        Command::Classify { path, res } => {
            let g = load(&path)?;
            let g = if res.drop_zero_arrows { drop_zero_arrows(&g) } else { g };
            let g = if res.raw { g } else { normalized(&g)? };
            let class = pairs::classify(&g)?;
            for (v, a) in g.vertices.iter().zip(pairs::discrepancies(&g)?) {
                out.put(&format!("discrepancy.{}", v.id), a);
            }
            out.put("classification", class.label());
        }
        Command::Lct { path, res } => {
            let g = load(&path)?;
            let t = resolved(&g, res, &mut out, pairs::lct)?;
            out.put("lct", t);
        }
        Command::Star { path, res } => {
            let g = load(&path)?;
            let g = if res.drop_zero_arrows { drop_zero_arrows(&g) } else { g };
            let g = if res.raw { g } else { normalized(&g)? };
            let s = match detect_star(&g) {
                Detection::Star(s) => s,
                Detection::Chain => return Err(not_a_star("graph is a string")),
                Detection::NotStar => return Err(not_a_star("graph is not star-shaped")),
            };
            out.put("center", &g.vertices[s.center].id);
            out.put("genus", s.genus);
            out.put("d", s.d);
            out.put("t", s.t());
            for (i, b) in s.branches.iter().enumerate() {
                let key = |k: &str| format!("branch.{}.{k}", i + 1);
                out.put(&key("m"), b.chain.m);
                out.put(&key("q"), b.chain.q);
                out.put(&key("c"), &b.c);
            }
            out.put("chi", &s.chi);
            out.put("epsilon", &s.epsilon);
            out.put("chi_c", &s.chi_c);
            let closed = star_pcp(&s)?;
            out.put("f_squared", &closed.f_squared);
            out.put("pcp", &closed.pcp);
            match lct_star(&s) {
                Ok(t) => out.put("lct", t),
                Err(e) => out.put("lct", format!("n/a ({e})")),
            }
        }
        Command::Vol0 { path } => {
            let g = load(&path)?;
            echo_arrows(&g, &mut out, true);
            match match_case(&g)? {
                Vol0Match::Case(c) => {
                    out.put("volume", 0);
                    out.put("case", c.label);
                    out.put("parameters", c.parameters());
                }
                Vol0Match::NotVolumeZero(v) => {
                    out.put("volume", v);
                    out.put("case", "none");
                }
            }
        }
        Command::SearchMin { bounds, csv, sequential } => {
            let mode = mode(sequential);
            out.put("bounds", bounds);
            let s = rdp_star_search(bounds, mode)?;
            out.put("configurations", s.configurations);
            out.put("distinct_positive_volumes", s.volumes.len());
            match &s.min {
                Some(m) => out.put("min_volume", m),
                None => out.put("min_volume", "none"),
            }
            for (i, p) in s.argmin.iter().enumerate() {
                out.put(&format!("argmin.{}", i + 1), p);
            }
            if let Some(c) = &s.min_chi_bar {
                out.put("min_chi_bar", c);
            }
            if let Some(path) = csv {
                let rows = write_search_csv(bounds, mode, BufWriter::new(File::create(&path)?))?;
                out.put("csv_rows", rows);
            }
        }
        Command::Census { max_k, bounds, csv, sequential } => {
            let list = |v: Vec<[u64; 3]>| {
                v.iter().map(|k| format!("({},{},{})", k[0], k[1], k[2])).collect::<Vec<_>>().join(" ")
            };
            out.put("max_k", max_k);
            out.put("star3_types", list(enumerate_star3_types(max_k)));
            out.put("weights_234", list(enumerate_234_weights()));
            let families: Vec<String> = halfweight_lc_determinants().iter().map(ToString::to_string).collect();
            out.put("determinant_families", families.join(" "));
            out.put("bounds", format!("m={},n={},d={}", bounds.max_m, bounds.max_n, bounds.max_d));
            let s = star3_census(bounds, mode(sequential), |label, _| label.is_some())?;
            out.put("stars", s.total);
            out.put("volume_zero", s.volume_zero);
            match &s.min_positive {
                Some(m) => out.put("min_positive_volume", m),
                None => out.put("min_positive_volume", "none"),
            }
            if let Some(path) = csv {
                write_census_csv(&s.rows, BufWriter::new(File::create(&path)?))?;
                out.put("csv_rows", s.rows.len());
            }
        }
        Command::Invariance { path, seed, cases } => {
            let given = path.as_deref().map(load).transpose()?;
            let mut rng = random::seeded(seed);
            let mut blow_ups = 0usize;
            for _ in 0..cases {
                let p = match &given {
                    Some(g) => g.clone(),
                    None => random::pair(&mut rng, 7),
                };
                let q = random::blow_ups(&mut rng, &p, 5);
                blow_ups += q.vertices.len() - p.vertices.len();
                let (a, b) = (pairs::pcp(&p)?, pairs::pcp(&q)?);
                if a != b {
                    return Err(pairvol::Error::CertificateFailure(format!("pcp {a} became {b}\n{p}")).into());
                }
                let (p, q) = (drop_zero_arrows(&p), drop_zero_arrows(&q));
                let (a, b) = (pairs::volume(&p)?, pairs::volume(&q)?);
                if a != b {
                    return Err(pairvol::Error::CertificateFailure(format!("volume {a} became {b}\n{p}")).into());
                }
            }
            out.put("seed", seed);
            out.put("cases", cases);
            out.put("blow_ups", blow_ups);
            out.put("pcp_invariant", true);
            out.put("volume_invariant", true);
        }
    }
    Ok(out.0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_DOMAIN);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let first = e.to_string();
            eprintln!("error: {}", first.lines().next().unwrap_or_default());
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}
