//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::certify::{
    self, archimedean_gap, build_phi, certify_lower_bound, estimate_optimal_d, ordered_orbits,
    parse_table, verify_table_row, CertConfig, PhiSet,
};
use crate::error::{Error, Result};
use crate::expr::{self, eval, Iv};
use crate::heights::{mahler_measure, orbit_height, weil_height, AlgebraicNumber};
use crate::mobius::{FiniteGroup, MobiusMap};
use crate::numth::ExtendedPoint;
use crate::orbits::{compute_o, height_zeros, orbit_of, special_points, unity_witness, OrbitSetO};
use crate::poly::Poly;
use crate::real::Interval;
use crate::search::{min_orbit_height, SearchSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "orbit-height",
    version,
    about = "Heights of orbits of algebraic numbers under finite Mobius groups"
)]
pub struct Cli {
    /// Working precision in bits
    #[arg(
        long,
        global = true,
        env = "ORBIT_HEIGHT_PRECISION",
        default_value_t = 128
    )]
    pub precision: u64,
    /// Samples per circle
    #[arg(long, global = true, default_value_t = 16384)]
    pub samples: usize,
    /// Safety grid size per side
    #[arg(long, global = true, default_value_t = 600)]
    pub grid: usize,
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mahler measure of an integer polynomial
    Mahler {
        #[arg(allow_hyphen_values = true)]
        poly: String,
    },
    /// Weil height of a root of an irreducible polynomial
    Height {
        #[arg(allow_hyphen_values = true)]
        poly: String,
    },
    /// G-orbit height of a root of an irreducible polynomial
    OrbitHeight {
        #[arg(allow_hyphen_values = true)]
        group: String,
        #[arg(allow_hyphen_values = true)]
        poly: String,
    },
    /// Closure of the given generators
    Group {
        #[arg(allow_hyphen_values = true)]
        gens: Vec<String>,
    },
    /// Orbits of the special points
    Orbits {
        #[arg(allow_hyphen_values = true)]
        group: String,
    },
    /// Whether O is finite, and its members
    #[command(name = "classify-O")]
    ClassifyO {
        #[arg(allow_hyphen_values = true)]
        group: String,
    },
    /// Special points where h_G vanishes
    Zeros {
        #[arg(allow_hyphen_values = true)]
        group: String,
    },
    /// A root of unity with positive G-orbit height
    Witness {
        #[arg(allow_hyphen_values = true)]
        group: String,
        #[arg(long, default_value_t = 60)]
        bound: u64,
    },
    /// The functions phi for the orbits of O (orbit of 0 first)
    Phi {
        #[arg(allow_hyphen_values = true)]
        group: String,
    },
    /// Gap function at an exact point
    Gap {
        #[arg(allow_hyphen_values = true)]
        group: String,
        #[arg(allow_hyphen_values = true)]
        point: String,
        /// Weights, one per orbit of O starting with the orbit of 0
        #[arg(long = "B", required = true)]
        b: Vec<String>,
    },
    /// Sampled check of the lower bound D for the gap function
    Certify {
        #[arg(allow_hyphen_values = true)]
        group: String,
        /// Weights, one per orbit of O starting with the orbit of 0
        #[arg(long = "B", required = true)]
        b: Vec<String>,
        /// Claimed lower bound
        #[arg(long = "D", allow_hyphen_values = true)]
        d: String,
    },
    /// Numerical optimum of the gap function
    #[command(name = "optimal-D")]
    OptimalD {
        #[arg(allow_hyphen_values = true)]
        group: String,
        /// Weights, one per orbit of O starting with the orbit of 0
        #[arg(long = "B", required = true)]
        b: Vec<String>,
    },
    /// Verify rows of a table file (or table1, table2, all)
    Table {
        #[arg(allow_hyphen_values = true)]
        file: String,
        #[arg(long, default_value_t = 5, allow_hyphen_values = true)]
        p: i64,
        #[arg(long, default_value_t = 1)]
        q: i64,
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<i64>,
        #[arg(long)]
        row: Option<u32>,
    },
    /// Minimum of h_G over bounded polynomials
    Search {
        #[arg(allow_hyphen_values = true)]
        group: String,
        #[arg(long, default_value_t = 4)]
        deg: usize,
        #[arg(long, default_value_t = 2)]
        height: i64,
        #[arg(long)]
        skip_cyclotomic: bool,
    },
}

/// Result of a command: structured value, text rendering, success flag.
struct Outcome {
    json: Value,
    text: String,
    ok: bool,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Outcome {
            json,
            text,
            ok: true,
        }
    }
}

fn iv(v: &Interval, prec: u64) -> String {
    v.to_decimal(Interval::digits_for(prec))
}

fn parse_poly(s: &str) -> Result<Poly> {
    Poly::parse(s)
}

fn parse_weights(bs: &[String]) -> Result<Vec<Interval>> {
    bs.iter()
        .map(|b| Ok(eval::<Iv>(&expr::parse(b)?, &|_| None)?.0))
        .collect()
}

fn parse_real(s: &str) -> Result<f64> {
    let v = eval::<Iv>(&expr::parse(s)?, &|_| None)?.0;
    Ok(v.mid_f64())
}

fn phi_set(g: &FiniteGroup, bs: &[String]) -> Result<PhiSet> {
    PhiSet::from_orbits(g, &ordered_orbits(g)?, parse_weights(bs)?)
}

fn config(cli: &Cli) -> Result<CertConfig> {
    if cli.precision == 0 || cli.samples == 0 || cli.grid == 0 || cli.tol <= 0.0 {
        return Err(Error::Invalid(
            "precision, samples, grid and tol must be positive".into(),
        ));
    }
    Ok(CertConfig {
        precision: cli.precision,
        circle_samples: cli.samples,
        grid: cli.grid,
        tol: cli.tol,
        ..CertConfig::default()
    })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let prec = cli.precision;
    let cfg = config(cli)?;
    Ok(match &cli.command {
        Command::Mahler { poly } => {
            let f = parse_poly(poly)?;
            let m = mahler_measure(&f, prec)?;
            Outcome::ok(
                json!({"poly": f.to_string(), "mahler_measure": iv(&m, prec), "value": m.mid_f64()}),
                iv(&m, prec),
            )
        }
        Command::Height { poly } => {
            let a = AlgebraicNumber::from_minpoly(&parse_poly(poly)?)?;
            let h = weil_height(&a, prec)?;
            Outcome::ok(
                json!({"minpoly": a.minpoly().to_string(), "height": iv(&h, prec), "value": h.mid_f64()}),
                iv(&h, prec),
            )
        }
        Command::OrbitHeight { group, poly } => {
            let g = FiniteGroup::parse(group)?;
            let a = AlgebraicNumber::from_minpoly(&parse_poly(poly)?)?;
            let h = orbit_height(&g, &a, prec)?;
            Outcome::ok(
                json!({"group": g.to_string(), "minpoly": a.minpoly().to_string(), "orbit_height": iv(&h, prec), "value": h.mid_f64()}),
                iv(&h, prec),
            )
        }
        Command::Group { gens } => {
            let ms = gens
                .iter()
                .map(|s| s.parse::<MobiusMap>())
                .collect::<Result<Vec<_>>>()?;
            let g = FiniteGroup::generate(&ms)?;
            let elems: Vec<String> = g.elements().iter().map(|s| s.to_string()).collect();
            let orders: Vec<String> = g.elements().iter().map(|s| s.order().to_string()).collect();
            let mut text = format!(
                "order {} ({})\n",
                g.len(),
                if g.is_cyclic() {
                    "cyclic"
                } else {
                    "not cyclic"
                }
            );
            for (e, o) in elems.iter().zip(&orders) {
                text.push_str(&format!("{e}  order {o}\n"));
            }
            Outcome::ok(
                json!({"order": g.len(), "cyclic": g.is_cyclic(), "elements": elems, "element_orders": orders}),
                text.trim_end().to_string(),
            )
        }
        Command::Orbits { group } => {
            let g = FiniteGroup::parse(group)?;
            let mut rows = vec![];
            let mut text = String::new();
            for p in special_points() {
                let o = orbit_of(&g, &p.clone().into());
                text.push_str(&format!(
                    "{p}: {o}{}\n",
                    if o.in_o() { "  in O" } else { "" }
                ));
                rows.push(json!({"point": p.to_string(), "orbit": o, "in_O": o.in_o()}));
            }
            Outcome::ok(Value::Array(rows), text.trim_end().to_string())
        }
        Command::ClassifyO { group } => {
            let g = FiniteGroup::parse(group)?;
            match compute_o(&g) {
                OrbitSetO::Infinite => Outcome::ok(json!({"O": "INFINITE"}), "INFINITE".into()),
                OrbitSetO::Finite(os) => {
                    let shown: Vec<String> = os.iter().map(|o| o.to_string()).collect();
                    Outcome::ok(
                        json!({"O": "FINITE", "orbits": os}),
                        format!("FINITE\n{}", shown.join("\n"))
                            .trim_end()
                            .to_string(),
                    )
                }
            }
        }
        Command::Zeros { group } => {
            let g = FiniteGroup::parse(group)?;
            let z: Vec<String> = height_zeros(&g)?.iter().map(|p| p.to_string()).collect();
            Outcome::ok(json!({"zeros": z}), z.join("\n"))
        }
        Command::Witness { group, bound } => {
            let g = FiniteGroup::parse(group)?;
            let w = unity_witness(&g, *bound, prec)?;
            Outcome::ok(
                json!({"order": w.order, "minpoly": w.minpoly.to_string(), "orbit_height": iv(&w.height, prec)}),
                format!(
                    "n = {}  {}  h_G = {}",
                    w.order,
                    w.minpoly,
                    iv(&w.height, prec)
                ),
            )
        }
        Command::Phi { group } => {
            let g = FiniteGroup::parse(group)?;
            let mut rows = vec![];
            let mut text = String::new();
            for o in ordered_orbits(&g)? {
                let r = build_phi(&g, &o)?;
                text.push_str(&format!("{o}: {r}\n"));
                rows.push(json!({"orbit": o, "phi": r.to_string()}));
            }
            Outcome::ok(Value::Array(rows), text.trim_end().to_string())
        }
        Command::Gap { group, point, b } => {
            let g = FiniteGroup::parse(group)?;
            let z = match expr::parse_point(point)? {
                ExtendedPoint::Finite(z) => z,
                ExtendedPoint::Infinity => {
                    return Err(Error::Invalid("point must be finite".into()))
                }
            };
            let v = archimedean_gap(&g, &phi_set(&g, b)?, &z, prec)?;
            let s = match &v {
                certify::GapValue::Finite(x) => iv(x, prec),
                certify::GapValue::PlusInfinity => "+inf".into(),
            };
            Outcome::ok(json!({"point": z.to_string(), "gap": s}), s)
        }
        Command::Certify { group, b, d } => {
            let g = FiniteGroup::parse(group)?;
            let r = certify_lower_bound(&g, &phi_set(&g, b)?, parse_real(d)?, &cfg);
            Outcome {
                json: serde_json::to_value(&r).expect("report serializes"),
                text: r.to_string(),
                ok: r.pass,
            }
        }
        Command::OptimalD { group, b } => {
            let g = FiniteGroup::parse(group)?;
            let (d, z) = estimate_optimal_d(&g, &phi_set(&g, b)?, &cfg);
            Outcome::ok(
                json!({"D": d, "exp_D": d.exp(), "argmin": [z.re, z.im]}),
                format!(
                    "D = {d:.10}  exp(D) = {:.10}  at {:.10}{:+.10}i",
                    d.exp(),
                    z.re,
                    z.im
                ),
            )
        }
        Command::Table {
            file,
            p,
            q,
            sign,
            row,
        } => table(file, *p, *q, *sign, *row, &cfg)?,
        Command::Search {
            group,
            deg,
            height,
            skip_cyclotomic,
        } => {
            let g = FiniteGroup::parse(group)?;
            let s = SearchSpace::new(*deg, *height, *skip_cyclotomic)?;
            let r = min_orbit_height(&g, &s, prec)?;
            Outcome::ok(
                serde_json::to_value(&r).expect("result serializes"),
                format!(
                    "space deg<={} height<={}  count={}  evaluated={}\nmin = {}\nwitness = {}",
                    deg,
                    height,
                    r.count,
                    r.evaluated,
                    iv(&r.min, prec),
                    r.witness
                ),
            )
        }
    })
}

fn table(
    file: &str,
    p: i64,
    q: i64,
    sign: Option<i64>,
    row: Option<u32>,
    cfg: &CertConfig,
) -> Result<Outcome> {
    let texts: Vec<String> = match file {
        "all" => vec![certify::TABLE1.into(), certify::TABLE2.into()],
        name => match certify::bundled_table(name) {
            Some(t) => vec![t.into()],
            None => vec![std::fs::read_to_string(name)
                .map_err(|e| Error::Invalid(format!("{name}: {e}")))?],
        },
    };
    let mut reports = vec![];
    let mut text = String::new();
    let mut ok = true;
    let mut counted = 0;
    let mut passed = 0;
    for t in texts {
        let rows = parse_table(&t)?;
        for spec in rows.iter().filter(|r| row.is_none_or(|k| r.index == k)) {
            for &s in spec.signs.iter().filter(|&&s| sign.is_none_or(|k| k == s)) {
                match verify_table_row(spec, s, p, q, cfg) {
                    Ok(r) => {
                        counted += 1;
                        if r.pass {
                            passed += 1;
                        }
                        ok &= r.pass;
                        text.push_str(&r.to_string());
                        reports.push(serde_json::to_value(&r).expect("report serializes"));
                    }
                    Err(e @ (Error::RowExcluded(_) | Error::SingularMatrix)) => {
                        text.push_str(&format!(
                            "table {} row {} sign {}: skipped ({e})\n",
                            spec.table,
                            spec.index,
                            if s > 0 { "+" } else { "-" }
                        ));
                        reports.push(json!({"table": spec.table, "index": spec.index, "sign": s, "skipped": e.to_string()}));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    if counted == 0 {
        return Err(Error::Invalid("no table rows selected".into()));
    }
    text.push_str(&format!("{passed}/{counted} rows passed"));
    Ok(Outcome {
        json: Value::Array(reports),
        text,
        ok,
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OrbitSetInfinite
        | Error::NoWitness
        | Error::BoundTooSmall(_)
        | Error::EmptySearch
        | Error::RootIsolation(_)
        | Error::IndeterminateAtPole(_)
        | Error::OrbitHitsInfinity { .. } => 1,
        _ => 2,
    }
}

/// Runs the command line `args`, writing to stdout/stderr; returns the exit
/// code.
/// Writes a line to stdout; a closed pipe is not an error.
fn emit(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Text => emit(&out.text),
                Format::Json => emit(&serde_json::to_string_pretty(&out.json).expect("json")),
            }
            if out.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            match cli.format {
                Format::Text => eprintln!("error: {e}"),
                Format::Json => emit(&json!({"error": e.to_string()}).to_string()),
            }
            exit_code(&e)
        }
    }
}
