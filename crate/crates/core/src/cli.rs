//! Command-line front end. `run` is the whole program; the binary only wires
//! process arguments and streams to it.
//!
//! Exit codes: 0 success, 1 a classification or identity check contradicts an
//! equivalence, 2 usage or input error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::criteria::{classify, Budget, SpaceClassification, CAVEAT};
use crate::dynamics::{
    cesaro_means, dyadic_schedule, power_bound_check, range_inverse_check, ErgodicReport,
};
use crate::sections::{
    eig_direct, eig_dual, exact_identities, format_complex, resolvent_checks, split,
    reconstruct, IdentityCheck,
};
use crate::spectra::{member, parse_rational, predict, EvidenceTables, Lambda, SpectrumDescription};
use crate::weights::{gallery, gallery_defaults, gallery_summary, GalleryParams, WeightFamily, GALLERY_KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cesaro", version, about = "Cesaro operator laboratory on co-echelon spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct BudgetArgs {
    /// Largest sampled index (power of two, 64..=2^20)
    #[arg(long, default_value_t = 1 << 14)]
    imax: u64,
    /// Number of outer indices n
    #[arg(long, default_value_t = 4)]
    nmax: u64,
    /// Inner search depth: m ranges over n+1..=n+M_max
    #[arg(long, default_value_t = 8)]
    mmax: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget::new(self.imax, self.nmax, self.mmax)
    }
}

#[derive(Args, Debug, Clone)]
struct SpaceArgs {
    /// Gallery key (see `cesaro gallery`)
    space: Option<String>,
    /// JSON definition file instead of a gallery key
    #[arg(long = "def", value_name = "FILE")]
    def: Option<PathBuf>,
    /// Gallery parameter, repeatable
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
}

#[derive(Args, Debug, Clone, Copy)]
struct OutArgs {
    #[arg(long)]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List gallery families
    Gallery {
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classify a weight family against the criteria
    Classify {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Predict the spectrum; optional membership queries
    Spectrum {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Point to test, "re,im" or "p/q"
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        /// re0:re1:step[,im0:im1:step]
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Section size for row-sum evidence
        #[arg(long = "N", default_value_t = 1024)]
        big_n: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Resolvent section (C - mu I)^-1 with its identity checks
    Resolvent {
        /// Shift, "re,im" or "p/q"
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        #[arg(long = "N", default_value_t = 10)]
        big_n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Matrix identity checks
    Verify {
        #[arg(value_enum, default_value_t = VerifyWhat::Identities)]
        what: VerifyWhat,
        #[arg(long = "N", default_value_t = 20)]
        big_n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Power boundedness and Cesaro means on a truncated vector
    Dynamics {
        #[command(flatten)]
        space: SpaceArgs,
        /// Vector length
        #[arg(long = "N", default_value_t = 64)]
        big_n: usize,
        /// Seminorm index
        #[arg(long, default_value_t = 1)]
        n: u64,
        /// ones | e<k> | random
        #[arg(long, default_value = "random")]
        x: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Means schedule 2^4..=2^kexp
        #[arg(long, default_value_t = 11)]
        kexp: u32,
        /// Power iterations checked
        #[arg(long, default_value_t = 64)]
        kmax: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Eigenvectors of C (direct) or C' (dual)
    Eigvec {
        #[arg(long, conflicts_with = "dual")]
        direct: Option<u64>,
        #[arg(long)]
        dual: Option<u64>,
        #[arg(long = "N", default_value_t = 16)]
        big_n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum VerifyWhat {
    Identities,
    Resolvent,
    All,
}

#[derive(Debug)]
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Res = Result<i32, Usage>;

/// Runs the program on `argv` (including the program name).
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let r = match cli.cmd {
        Cmd::Gallery { out: o } => cmd_gallery(o, out),
        Cmd::Classify { space, budget, out: o } => cmd_classify(&space, &budget, o, out),
        Cmd::Spectrum {
            space,
            budget,
            lambda,
            grid,
            big_n,
            out: o,
        } => cmd_spectrum(&space, &budget, lambda.as_deref(), grid.as_deref(), big_n, o, out),
        Cmd::Resolvent { mu, big_n, out: o } => cmd_resolvent(&mu, big_n, o, out),
        Cmd::Verify { what, big_n, out: o } => cmd_verify(what, big_n, o, out),
        Cmd::Dynamics {
            space,
            big_n,
            n,
            x,
            seed,
            kexp,
            kmax,
            out: o,
        } => cmd_dynamics(&space, big_n, n, &x, seed, kexp, kmax, o, out),
        Cmd::Eigvec {
            direct,
            dual,
            big_n,
            out: o,
        } => cmd_eigvec(direct, dual, big_n, o, out),
    };
    match r {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn header(budget: &Budget) -> String {
    format!(
        "budget I_max={}, N_max={}, M_max={}; {CAVEAT}",
        budget.i_max, budget.n_max, budget.m_max
    )
}

fn emit_json(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), Usage> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn parse_params(raw: &[String]) -> Result<GalleryParams, Usage> {
    let mut p = GalleryParams::new();
    for kv in raw {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Usage(format!("--param expects K=V, got `{kv}`")))?;
        p.insert(k.trim().to_string(), v.trim().parse().unwrap());
    }
    Ok(p)
}

fn load_family(s: &SpaceArgs) -> Result<WeightFamily, Usage> {
    match (&s.space, &s.def) {
        (Some(_), Some(_)) => Err(Usage("give either a gallery key or --def, not both".into())),
        (None, None) => Err(Usage("missing space: a gallery key or --def FILE".into())),
        (None, Some(path)) => {
            if !s.params.is_empty() {
                return Err(Usage("--param applies to gallery keys only".into()));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| Usage(format!("--def {}: {e}", path.display())))?;
            WeightFamily::from_json(&text).map_err(|e| Usage(format!("--def {}: {e}", path.display())))
        }
        (Some(key), None) => Ok(gallery(key, &parse_params(&s.params)?)?),
    }
}

fn parse_complex(flag: &str, text: &str) -> Result<Complex64, Usage> {
    text.parse::<Lambda>()
        .map(|l| l.to_complex())
        .map_err(|e| Usage(format!("{flag}: {e}")))
}

fn cmd_gallery(o: OutArgs, out: &mut dyn Write) -> Res {
    let fams = gallery_defaults();
    if o.json {
        let entries: Vec<_> = GALLERY_KEYS
            .iter()
            .map(|k| {
                let defaults: Vec<_> = fams
                    .iter()
                    .filter(|f| f.name == *k || f.name.starts_with(&format!("{k}(")))
                    .map(|f| json!({"name": f.name, "logA": f.formula, "offset": f.offset}))
                    .collect();
                json!({"key": k, "summary": gallery_summary(k), "instances": defaults})
            })
            .collect();
        emit_json(out, &json!({"gallery": entries, "caveat": CAVEAT}))?;
    } else {
        for k in GALLERY_KEYS {
            writeln!(out, "{k:<16} {}", gallery_summary(k).unwrap_or(""))?;
        }
    }
    Ok(EXIT_OK)
}

fn exit_for(cls: &SpaceClassification) -> i32 {
    if cls.is_consistent() {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    }
}

fn cmd_classify(s: &SpaceArgs, b: &BudgetArgs, o: OutArgs, out: &mut dyn Write) -> Res {
    let fam = load_family(s)?;
    let cls = classify(&fam, b.budget())?;
    if o.json {
        emit_json(out, &cls.to_json())?;
    } else {
        write!(out, "{}", cls.to_text())?;
    }
    Ok(exit_for(&cls))
}

/// `a:b:step` as exact points `a, a+step, ...` up to `b`.
fn parse_axis(flag: &str, text: &str) -> Result<Vec<BigRational>, Usage> {
    let parts: Vec<_> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Usage(format!("{flag}: expected start:end:step, got `{text}`")));
    }
    let num = |t: &str| {
        parse_rational(t).ok_or_else(|| Usage(format!("{flag}: `{t}` is not a number")))
    };
    let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if step <= BigRational::zero() || b < a {
        return Err(Usage(format!("{flag}: need start <= end and step > 0")));
    }
    let mut pts = Vec::new();
    let mut x = a;
    while x <= b {
        pts.push(x.clone());
        x += &step;
        if pts.len() > 1_000_000 {
            return Err(Usage(format!("{flag}: more than 10^6 points")));
        }
    }
    Ok(pts)
}

fn parse_grid(text: &str) -> Result<Vec<Lambda>, Usage> {
    let (re, im) = match text.split_once(',') {
        Some((r, i)) => (parse_axis("--grid", r)?, parse_axis("--grid", i)?),
        None => (parse_axis("--grid", text)?, vec![BigRational::zero()]),
    };
    let mut pts = Vec::with_capacity(re.len() * im.len());
    for y in &im {
        for x in &re {
            pts.push(Lambda::exact(x.clone(), y.clone()));
        }
    }
    Ok(pts)
}

fn spectrum_json(fam: &WeightFamily, b: &Budget, cls: &SpaceClassification, d: &SpectrumDescription) -> serde_json::Value {
    let mut v = d.to_json();
    v["family"] = json!(fam.name);
    v["budget"] = json!(b);
    v["caveat"] = json!(CAVEAT);
    v["classification"] = json!(cls.summary);
    v
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    s: &SpaceArgs,
    b: &BudgetArgs,
    lambda: Option<&str>,
    grid: Option<&str>,
    big_n: u64,
    o: OutArgs,
    out: &mut dyn Write,
) -> Res {
    let fam = load_family(s)?;
    let budget = b.budget();
    let cls = classify(&fam, budget)?;
    let desc = predict(&cls)?;
    let point = match lambda {
        Some(t) => Some(t.parse::<Lambda>().map_err(|e| Usage(format!("--lambda: {e}")))?),
        None => None,
    };
    let points = match grid {
        Some(g) => Some(parse_grid(g)?),
        None => None,
    };
    let tables = if points.is_some() || point.is_some() {
        Some(EvidenceTables::new(&fam, 1, 2, big_n)?)
    } else {
        None
    };
    let evidence = |l: &Lambda| -> String {
        match tables.as_ref().map(|t| t.evidence(l.to_complex())) {
            Some(Ok(rep)) => rep.classification.to_string(),
            Some(Err(_)) => "singular".into(),
            None => String::new(),
        }
    };
    if o.csv {
        let pts = points.unwrap_or_else(|| point.into_iter().collect());
        writeln!(out, "re,im,membership,evidence")?;
        for l in &pts {
            let z = l.to_complex();
            writeln!(out, "{},{},{},{}", z.re, z.im, member(&desc, l).name(), evidence(l))?;
        }
        return Ok(exit_for(&cls));
    }
    if o.json {
        let mut v = spectrum_json(&fam, &budget, &cls, &desc);
        if let Some(l) = &point {
            v["query"] = json!({
                "lambda": l.to_string(),
                "membership": member(&desc, l).name(),
                "evidence": evidence(l),
                "evidence_indices": [1, 2],
                "evidence_N": big_n,
            });
        }
        emit_json(out, &v)?;
    } else {
        writeln!(out, "family {}: {}", fam.name, header(&budget))?;
        writeln!(out, "shape: {:?} ({})", desc.shape, desc.shape.describe())?;
        writeln!(out, "sigma_pt: {:?}", desc.sigma_pt)?;
        match &desc.sigma_star {
            Some(st) => writeln!(out, "sigma*: {st}")?,
            None => writeln!(out, "sigma*: not specified")?,
        }
        if let Some(l) = &point {
            writeln!(
                out,
                "lambda {}: {} (row-sum evidence n=1, m=2, N={big_n}: {})",
                l,
                member(&desc, l).name(),
                evidence(l)
            )?;
        }
    }
    Ok(exit_for(&cls))
}

fn checks_json(checks: &[IdentityCheck]) -> serde_json::Value {
    json!({
        "checks": checks,
        "all_passed": checks.iter().all(|c| c.passed),
        "budget": Budget::default(),
        "caveat": CAVEAT,
    })
}

fn cmd_resolvent(mu: &str, n: usize, o: OutArgs, out: &mut dyn Write) -> Res {
    if n == 0 {
        return Err(Usage("--N must be at least 1".into()));
    }
    let mu = parse_complex("--mu", mu)?;
    let (d, e) = split(mu, n)?;
    let r = reconstruct(mu, &d, &e)?;
    let checks = resolvent_checks(mu, n)?;
    let ok = checks.iter().all(|c| c.passed);
    if o.csv {
        write!(out, "{}", r.to_csv())?;
    } else if o.json {
        let mut v = checks_json(&checks);
        v["mu"] = json!([mu.re, mu.im]);
        v["resolvent"] = r.to_json();
        v["D_mu"] = d.to_json();
        v["E_mu"] = e.to_json();
        v["note"] = json!("E_mu includes column j = 1; the product runs over k = j..=i");
        emit_json(out, &v)?;
    } else {
        writeln!(out, "resolvent at mu = {}, N = {n}; {CAVEAT}", format_complex(mu))?;
        for c in &checks {
            writeln!(
                out,
                "{:<6} {} (max error {:.3e})",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.max_error
            )?;
        }
        writeln!(out, "note: E_mu includes column j = 1")?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn cmd_verify(what: VerifyWhat, n: usize, o: OutArgs, out: &mut dyn Write) -> Res {
    if n < 2 {
        return Err(Usage("--N must be at least 2".into()));
    }
    let mut checks = Vec::new();
    if matches!(what, VerifyWhat::Identities | VerifyWhat::All) {
        checks.extend(exact_identities(n));
        let r = range_inverse_check(n);
        checks.push(IdentityCheck {
            name: "range inverse: T*B = B*T = I".into(),
            n,
            kind: crate::sections::Kind::Exact,
            passed: r.passed(),
            max_error: if r.passed() { 0.0 } else { f64::NAN },
        });
    }
    if matches!(what, VerifyWhat::Resolvent | VerifyWhat::All) {
        for mu in [
            Complex64::new(2.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.4, 0.3),
            Complex64::new(0.25, 0.1),
        ] {
            checks.extend(resolvent_checks(mu, n)?);
        }
    }
    let ok = checks.iter().all(|c| c.passed);
    if o.json {
        emit_json(out, &checks_json(&checks))?;
    } else {
        writeln!(out, "{CAVEAT}")?;
        for c in &checks {
            writeln!(
                out,
                "{:<6} {:<50} N={:<4} {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.n,
                c.kind.name()
            )?;
        }
        writeln!(out, "{}", if ok { "all checks passed" } else { "some checks FAILED" })?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn make_vector(which: &str, len: usize, seed: u64) -> Result<crate::weights::WeightedVector, Usage> {
    use crate::weights::WeightedVector;
    if len == 0 {
        return Err(Usage("--N must be at least 1".into()));
    }
    match which {
        "ones" => Ok(WeightedVector::ones(len)),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = (0..len)
                .map(|_| {
                    Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU)
                })
                .collect();
            Ok(WeightedVector::new(v).expect("non-empty"))
        }
        _ => {
            let k = which
                .strip_prefix('e')
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&k| k >= 1 && k <= len)
                .ok_or_else(|| Usage(format!("--x: expected ones, random or e<k> with 1 <= k <= N, got `{which}`")))?;
            Ok(WeightedVector::unit(k, len))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_dynamics(
    s: &SpaceArgs,
    len: usize,
    n: u64,
    x: &str,
    seed: u64,
    kexp: u32,
    kmax: u64,
    o: OutArgs,
    out: &mut dyn Write,
) -> Res {
    if !(4..=20).contains(&kexp) {
        return Err(Usage("--kexp must lie in 4..=20".into()));
    }
    let fam = load_family(s)?;
    let v = make_vector(x, len, seed)?;
    let power = power_bound_check(&fam, n, &v, kmax)?;
    let means = cesaro_means(&fam, n, &v, &dyadic_schedule(4, kexp))?;
    if o.csv {
        write!(out, "{}", means.to_csv())?;
    } else if o.json {
        emit_json(
            out,
            &json!({
                "family": fam.name,
                "x": x,
                "seed": seed,
                "power_bound": power,
                "means": means,
                "converged": means.converged(),
                "budget": Budget::default(),
                "caveat": CAVEAT,
            }),
        )?;
    } else {
        writeln!(out, "family {}, n = {n}, N = {len}, x = {x}; {CAVEAT}", fam.name)?;
        writeln!(
            out,
            "power bound: {} violations over k <= {kmax}",
            power.bound_violations
        )?;
        write_means(out, &means)?;
    }
    let ok = power.bound_violations == 0 && means.bound_violations == 0;
    Ok(if ok { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn write_means(out: &mut dyn Write, m: &ErgodicReport) -> Result<(), Usage> {
    for (k, d) in m.k_schedule.iter().zip(&m.distances) {
        writeln!(out, "  k = {k:<8} distance {d:.6e}")?;
    }
    writeln!(
        out,
        "eventually decreasing: {}, halved: {}",
        m.eventually_decreasing(),
        m.halved()
    )?;
    Ok(())
}

fn cmd_eigvec(direct: Option<u64>, dual: Option<u64>, n: usize, o: OutArgs, out: &mut dyn Write) -> Res {
    let v = match (direct, dual) {
        (Some(m), None) if m >= 1 => eig_direct(m, n),
        (None, Some(s)) if s >= 1 => eig_dual(s),
        (None, None) => return Err(Usage("give --direct M or --dual S".into())),
        _ => return Err(Usage("--direct / --dual must be positive".into())),
    };
    let ok = v.verify();
    if o.json {
        let mut j = v.to_json();
        j["verified"] = json!(ok);
        j["caveat"] = json!(CAVEAT);
        j["budget"] = json!(Budget::default());
        emit_json(out, &j)?;
    } else if o.csv {
        writeln!(out, "i,entry")?;
        for (i, x) in v.entries.iter().enumerate() {
            writeln!(out, "{},{x}", i + 1)?;
        }
    } else {
        writeln!(out, "{:?} eigenvector, eigenvalue {}; {CAVEAT}", v.side, v.eigenvalue)?;
        let shown: Vec<String> = v.entries.iter().map(|x| x.to_string()).collect();
        writeln!(out, "({})", shown.join(", "))?;
        writeln!(out, "verified exactly: {ok}")?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_INCONSISTENT })
}
