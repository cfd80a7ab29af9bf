//! Command-line front end: argument parsing, dispatch and output formatting.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::category::{category_equal, closure, CategoryExpr, Counterexample, MAX_CLOSURE_POINTS};
use crate::enumerate::{count, enumerate, CategoryId};
use crate::error::{Error, Result};
use crate::identities::{table, Identity};
use crate::models::{
    check, quotient_projections, sample_classical, witness_search, BlockMatrixModel, CheckReport,
    ClassicalGroup, RelationPreset, DEFAULT_TOL,
};
use crate::moments::{
    character_count, cumulants_from_moments, dilate, finite_group_moment, free_convolve,
    free_poisson, parse_rational, FiniteGroup, Weighting,
};
use crate::partition::{from_json, to_json_value, Diagram};
use crate::tensor_rep::{
    f_matrix, fix_dim, gram_rank, is_intertwiner, is_intertwiner_dense, t_matrix, xi_vector,
    IndexSpace, TImpl,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Parser, Debug)]
#[command(name = "easyq", version, about = "Partition categories, intertwiners and matrix models on J_{p,q}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct SpaceArgs {
    /// Number of index pairs.
    #[arg(long)]
    p: Option<usize>,
    /// Number of unpaired indices.
    #[arg(long)]
    q: Option<usize>,
    /// Shorthand for `--p 0 --q N`.
    #[arg(long, conflicts_with_all = ["p", "q"])]
    n: Option<usize>,
}

impl SpaceArgs {
    fn space(self) -> Result<IndexSpace> {
        match self.n {
            Some(n) => IndexSpace::new(0, n),
            None => IndexSpace::new(self.p.unwrap_or(0), self.q.unwrap_or(0)),
        }
    }

    /// Falls back to `p = 0, q = n` when no dimension flag is given.
    fn space_or(self, n: usize) -> Result<IndexSpace> {
        match (self.p, self.q, self.n) {
            (None, None, None) => IndexSpace::new(0, n),
            _ => self.space(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ImplArg {
    Plain,
    Bulleted,
    Product,
    #[value(name = "general-f")]
    GeneralF,
}

fn resolve_impl(arg: Option<ImplArg>, kind: crate::partition::Kind, space: &IndexSpace) -> TImpl {
    match arg {
        None => TImpl::for_kind(kind),
        Some(ImplArg::Plain) => TImpl::Plain,
        Some(ImplArg::Bulleted) => TImpl::Bulleted,
        Some(ImplArg::Product) => TImpl::Product,
        Some(ImplArg::GeneralF) => TImpl::GeneralF(f_matrix(space)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Law {
    FreePoisson,
    Sq,
    Hq,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// |cat(0,k)| by enumeration.
    Count {
        #[arg(long)]
        cat: String,
        #[arg(long, conflicts_with = "upto")]
        k: Option<usize>,
        /// Emit every k from 0 to this bound, inclusive.
        #[arg(long)]
        upto: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Members of cat(k,l) in canonical order.
    Enumerate {
        #[arg(long)]
        cat: String,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        l: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Sizes of the category generated by the given partitions.
    Closure {
        /// Generator in partition JSON, or `@path` to a file holding one or a list.
        #[arg(long = "gen", required = true)]
        generators: Vec<String>,
        #[arg(long, default_value_t = 4)]
        max_points: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Compares two categories (or intersections `A&B`) up to a point bound.
    Equal {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 6)]
        max_points: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Rank of the Gram matrix of T_π over cat(0,k), or cat(k,l) when --l is given.
    Gram {
        #[arg(long)]
        cat: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: Option<usize>,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long = "impl", value_enum)]
        implementation: Option<ImplArg>,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// Dimension of span{T_π : π ∈ cat(0,k)}.
    Fixdim {
        #[arg(long)]
        cat: String,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long = "impl", value_enum)]
        implementation: Option<ImplArg>,
        #[arg(long, value_enum, default_value = "pretty")]
        format: Format,
    },
    /// The matrix T_π of one partition.
    Tmatrix {
        /// Partition JSON, or `@path`.
        #[arg(long)]
        partition: String,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long = "impl", value_enum)]
        implementation: Option<ImplArg>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Checks a model file or seeded samples against relation presets.
    Verify {
        /// Preset to check; defaults to the sampled group's presets.
        #[arg(long)]
        preset: Vec<String>,
        #[arg(long, required_unless_present = "sample", conflicts_with = "sample")]
        file: Option<String>,
        /// Classical group to sample instead of reading a file.
        #[arg(long)]
        sample: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds to sample.
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Also check that ξ (and η for b samples) are fixed vectors.
        #[arg(long)]
        intertwiners: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// One seeded sample of a classical group as model JSON.
    Sample {
        #[arg(long)]
        group: String,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Entrywise projections U*U of a model passing hpq.
    Quotient {
        #[arg(long)]
        file: String,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Exact moment sequences.
    Moments {
        #[arg(long, value_enum)]
        law: Law,
        /// Rate of the free Poisson law.
        #[arg(long, default_value = "1")]
        t: String,
        /// Highest order.
        #[arg(long)]
        k: usize,
        /// Size of the finite group for sq/hq.
        #[arg(long)]
        q: Option<usize>,
        /// Scale factor s for the law of sX.
        #[arg(long)]
        dilate: Option<String>,
        /// Number of free copies to add (free convolution power).
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Weighted counts Σ_{π ∈ cat(0,k)} Π_b w(|b|).
    Counts {
        #[arg(long)]
        cat: String,
        #[arg(long)]
        upto: usize,
        /// plain, bullet (2^{b-1}), bullet+1 or an integer constant.
        #[arg(long, default_value = "plain")]
        weighting: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Both sides of a counting identity with a verdict per row.
    Table {
        #[arg(long)]
        identity: String,
        #[arg(long)]
        upto: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Searches for an hpq model with a nonzero block linking pair and q indices.
    WitnessSearch {
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// Output of a command before formatting.
enum Output {
    Table {
        headers: Vec<String>,
        rows: Vec<Vec<Value>>,
    },
    Value(Value),
    /// A single value printed bare in pretty mode.
    Scalar(&'static str, Value),
    Text {
        json: Value,
        csv: String,
        pretty: String,
    },
}

struct Outcome {
    output: Output,
    ok: bool,
}

impl Outcome {
    fn ok(output: Output) -> Self {
        Outcome { output, ok: true }
    }
}

fn table_output(headers: &[&str], rows: Vec<Vec<Value>>) -> Output {
    Output::Table {
        headers: headers.iter().map(|h| h.to_string()).collect(),
        rows,
    }
}

fn big(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn rational(x: &BigRational) -> Value {
    json!(x.to_string())
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(output: &Output, format: Format) -> String {
    match output {
        Output::Table { headers, rows } => match format {
            Format::Csv => {
                let mut s = headers.join(",");
                s.push('\n');
                for r in rows {
                    let cells: Vec<String> = r.iter().map(|c| csv_escape(&cell_text(c))).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let objects: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> =
                            headers.iter().cloned().zip(r.iter().cloned()).collect();
                        Value::Object(m)
                    })
                    .collect();
                format!("{}\n", Value::Array(objects))
            }
            Format::Pretty => {
                let texts: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(cell_text).collect()).collect();
                let widths: Vec<usize> = (0..headers.len())
                    .map(|i| {
                        texts
                            .iter()
                            .map(|r| r[i].chars().count())
                            .chain([headers[i].chars().count()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: &[String]| {
                    let padded: Vec<String> = cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}", w = *w))
                        .collect();
                    format!("{}\n", padded.join("  ").trim_end())
                };
                let mut s = line(headers);
                for r in &texts {
                    s.push_str(&line(r));
                }
                s
            }
        },
        Output::Value(v) => match format {
            Format::Pretty => format!("{}\n", serde_json::to_string_pretty(v).expect("serializable")),
            _ => format!("{v}\n"),
        },
        Output::Scalar(name, v) => match format {
            Format::Json => format!("{}\n", json!({ *name: v })),
            Format::Csv => format!("{name}\n{}\n", csv_escape(&cell_text(v))),
            Format::Pretty => format!("{}\n", cell_text(v)),
        },
        Output::Text { json, csv, pretty } => match format {
            Format::Json => format!("{json}\n"),
            Format::Csv => csv.clone(),
            Format::Pretty => pretty.clone(),
        },
    }
}

fn read_arg(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameters(format!("cannot read {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn read_model(path: &str) -> Result<BlockMatrixModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameters(format!("cannot read {path}: {e}")))?;
    BlockMatrixModel::from_json(&text)
}

fn read_generators(args: &[String]) -> Result<Vec<Diagram>> {
    let mut out = Vec::new();
    for a in args {
        let text = read_arg(a)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
            message: e.to_string(),
            position: Some((e.line(), e.column())),
        })?;
        match value {
            Value::Array(items) => {
                for item in items {
                    out.push(crate::partition::from_json_value(&item)?);
                }
            }
            other => out.push(crate::partition::from_json_value(&other)?),
        }
    }
    Ok(out)
}

fn report_rows(seed: Option<u64>, report: &CheckReport) -> Vec<Vec<Value>> {
    report
        .residuals
        .iter()
        .map(|(name, r)| {
            vec![
                seed.map_or(Value::Null, |s| json!(s)),
                json!(report.preset.to_string()),
                json!(name),
                json!(r),
                json!(*r <= report.tol),
            ]
        })
        .collect()
}

struct SampleResult {
    seed: Option<u64>,
    reports: Vec<CheckReport>,
    intertwiners: Vec<(String, f64, bool)>,
}

impl SampleResult {
    fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass) && self.intertwiners.iter().all(|(_, _, ok)| *ok)
    }

    fn to_json(&self) -> Value {
        let checks: Map<String, Value> = self
            .intertwiners
            .iter()
            .map(|(name, r, ok)| (name.clone(), json!({"residual": r, "pass": ok})))
            .collect();
        let mut v = json!({
            "pass": self.pass(),
            "reports": self.reports.iter().map(CheckReport::to_json_value).collect::<Vec<_>>(),
        });
        if let Some(s) = self.seed {
            v["seed"] = json!(s);
        }
        if !checks.is_empty() {
            v["intertwiners"] = Value::Object(checks);
        }
        v
    }
}

fn verify_model(
    u: &BlockMatrixModel,
    seed: Option<u64>,
    presets: &[RelationPreset],
    space: &IndexSpace,
    tol: f64,
    intertwiners: bool,
    group: Option<ClassicalGroup>,
) -> Result<SampleResult> {
    let reports = presets
        .iter()
        .map(|&preset| check(u, preset, space.p(), space.q(), tol))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    if intertwiners {
        let xi = is_intertwiner(&xi_vector(space), u, 0, 2, tol)?;
        checks.push(("xi".to_string(), xi.residual, xi.holds));
        if group == Some(ClassicalGroup::B) {
            let eta = nalgebra::DMatrix::from_element(space.n(), 1, num_complex::Complex64::new(1.0, 0.0));
            let r = is_intertwiner_dense(&eta, u, 0, 1, tol)?;
            checks.push(("eta".to_string(), r.residual, r.holds));
        }
    }
    Ok(SampleResult {
        seed,
        reports,
        intertwiners: checks,
    })
}

fn execute(cmd: Command) -> Result<(Outcome, Format)> {
    Ok(match cmd {
        Command::Count { cat, k, upto, format } => {
            let cat: CategoryId = cat.parse()?;
            let ks: Vec<usize> = match (k, upto) {
                (Some(k), _) => vec![k],
                (None, Some(u)) => (0..=u).collect(),
                (None, None) => return Err(Error::InvalidParameters("give --k or --upto".into())),
            };
            let rows = ks
                .into_iter()
                .map(|k| Ok(vec![json!(k), big(&count(&cat, k)?)]))
                .collect::<Result<Vec<_>>>()?;
            (Outcome::ok(table_output(&["k", "count"], rows)), format)
        }
        Command::Enumerate { cat, k, l, format } => {
            let cat: CategoryId = cat.parse()?;
            let members = enumerate(&cat, k, l)?;
            let json = Value::Array(members.iter().map(to_json_value).collect());
            let mut csv = String::from("index,partition\n");
            let mut pretty = String::new();
            for (i, d) in members.iter().enumerate() {
                csv.push_str(&format!("{i},{}\n", csv_escape(&to_json_value(d).to_string())));
                pretty.push_str(&format!("{d}\n"));
            }
            (Outcome::ok(Output::Text { json, csv, pretty }), format)
        }
        Command::Closure {
            generators,
            max_points,
            format,
        } => {
            crate::error::check_limit("points", max_points, MAX_CLOSURE_POINTS)?;
            let gens = read_generators(&generators)?;
            let set = closure(&gens, max_points)?;
            let mut rows = Vec::new();
            for n in 0..=max_points {
                for k in 0..=n {
                    rows.push(vec![json!(k), json!(n - k), json!(set.shape(k, n - k).len())]);
                }
            }
            (Outcome::ok(table_output(&["k", "l", "count"], rows)), format)
        }
        Command::Equal {
            a,
            b,
            max_points,
            format,
        } => {
            let ea: CategoryExpr = a.parse()?;
            let eb: CategoryExpr = b.parse()?;
            let diff = category_equal(&ea, &eb, max_points)?;
            let mut v = json!({
                "a": ea.to_string(),
                "b": eb.to_string(),
                "maxPoints": max_points,
                "equal": diff.is_none(),
            });
            if let Some(c) = &diff {
                let side = match c {
                    Counterexample::OnlyInFirst(_) => "a",
                    Counterexample::OnlyInSecond(_) => "b",
                };
                v["counterexample"] = json!({"onlyIn": side, "partition": to_json_value(c.diagram())});
            }
            (
                Outcome {
                    output: Output::Value(v),
                    ok: diff.is_none(),
                },
                format,
            )
        }
        Command::Gram {
            cat,
            k,
            l,
            space,
            implementation,
            format,
        } => {
            let cat: CategoryId = cat.parse()?;
            let space = space.space()?;
            let imp = resolve_impl(implementation, cat.kind(), &space);
            let diagrams = match l {
                Some(l) => enumerate(&cat, k, l)?,
                None => enumerate(&cat, 0, k)?,
            };
            let rank = gram_rank(&diagrams, &space, &imp)?;
            (Outcome::ok(Output::Scalar("rank", json!(rank))), format)
        }
        Command::Fixdim {
            cat,
            k,
            space,
            implementation,
            format,
        } => {
            let cat: CategoryId = cat.parse()?;
            let space = space.space()?;
            let imp = resolve_impl(implementation, cat.kind(), &space);
            let dim = fix_dim(&cat, k, &space, &imp)?;
            (Outcome::ok(Output::Scalar("dimension", json!(dim))), format)
        }
        Command::Tmatrix {
            partition,
            space,
            implementation,
            format,
        } => {
            let d = from_json(&read_arg(&partition)?)?;
            let space = space.space()?;
            let imp = resolve_impl(implementation, d.kind(), &space);
            let t = t_matrix(&d, &space, &imp)?;
            let dense = t.to_dense();
            let pretty: String = dense
                .iter()
                .map(|row| {
                    let cells: Vec<String> = row.iter().map(i64::to_string).collect();
                    format!("{}\n", cells.join(" "))
                })
                .collect();
            (
                Outcome::ok(Output::Text {
                    json: t.to_json_value(),
                    csv: t.to_csv(),
                    pretty,
                }),
                format,
            )
        }
        Command::Verify {
            preset,
            file,
            sample,
            seed,
            samples,
            space,
            tol,
            intertwiners,
            jobs,
            format,
        } => {
            let model = file.as_deref().map(read_model).transpose()?;
            let space = match &model {
                Some(u) => space.space_or(u.n())?,
                None => space.space()?,
            };
            let group = sample.as_deref().map(str::parse::<ClassicalGroup>).transpose()?;
            let mut presets: Vec<RelationPreset> =
                preset.iter().map(|p| p.parse()).collect::<Result<_>>()?;
            if presets.is_empty() {
                presets = match group {
                    Some(g) => g.presets().to_vec(),
                    None => {
                        return Err(Error::InvalidParameters("give --preset for a model file".into()))
                    }
                };
            }
            let results: Vec<SampleResult> = match (&model, group) {
                (Some(u), _) => {
                    vec![verify_model(u, None, &presets, &space, tol, intertwiners, None)?]
                }
                (None, Some(g)) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(jobs.max(1))
                        .build()
                        .map_err(|e| Error::InvalidParameters(e.to_string()))?;
                    pool.install(|| {
                        (seed..seed + samples)
                            .into_par_iter()
                            .map(|s| {
                                let u = sample_classical(g, space.p(), space.q(), s)?;
                                verify_model(&u, Some(s), &presets, &space, tol, intertwiners, Some(g))
                            })
                            .collect::<Result<Vec<_>>>()
                    })?
                }
                (None, None) => unreachable!("clap requires --file or --sample"),
            };
            let pass = results.iter().all(SampleResult::pass);
            let output = match format {
                Format::Csv | Format::Pretty => {
                    let rows = results
                        .iter()
                        .flat_map(|r| r.reports.iter().flat_map(|rep| report_rows(r.seed, rep)))
                        .collect();
                    table_output(&["seed", "preset", "relation", "residual", "pass"], rows)
                }
                Format::Json => Output::Value(json!({
                    "pass": pass,
                    "results": results.iter().map(SampleResult::to_json).collect::<Vec<_>>(),
                })),
            };
            (Outcome { output, ok: pass }, format)
        }
        Command::Sample {
            group,
            space,
            seed,
            format,
        } => {
            let group: ClassicalGroup = group.parse()?;
            let space = space.space()?;
            let u = sample_classical(group, space.p(), space.q(), seed)?;
            (Outcome::ok(model_output(&u)), format)
        }
        Command::Quotient {
            file,
            space,
            tol,
            format,
        } => {
            let space = space.space()?;
            let u = read_model(&file)?;
            match quotient_projections(&u, space.p(), space.q(), tol) {
                Ok(pm) => (Outcome::ok(model_output(&pm)), format),
                Err(Error::PrecondFailed(msg)) => {
                    let report = check(&u, RelationPreset::Hpq, space.p(), space.q(), tol)?;
                    let v = json!({"pass": false, "error": msg, "report": report.to_json_value()});
                    (
                        Outcome {
                            output: Output::Value(v),
                            ok: false,
                        },
                        format,
                    )
                }
                Err(e) => return Err(e),
            }
        }
        Command::Moments {
            law,
            t,
            k,
            q,
            dilate: scale,
            copies,
            format,
        } => {
            let rows = match law {
                Law::FreePoisson => {
                    let t = parse_rational(&t)?;
                    let mut m = free_poisson(&t, k)?;
                    let base = m.clone();
                    for _ in 1..copies.max(1) {
                        m = free_convolve(&m, &base, k)?;
                    }
                    if let Some(s) = scale {
                        m = dilate(&m, &parse_rational(&s)?, k)?;
                    }
                    let kappa = cumulants_from_moments(&m, k)?;
                    (1..=k)
                        .map(|i| vec![json!(i), rational(m.get(i)), rational(kappa.get(i))])
                        .collect::<Vec<_>>()
                }
                Law::Sq | Law::Hq => {
                    let group = if law == Law::Sq { FiniteGroup::Sq } else { FiniteGroup::Hq };
                    let q = q.ok_or_else(|| Error::InvalidParameters("give --q for sq/hq".into()))?;
                    (1..=k)
                        .map(|i| Ok(vec![json!(i), json!(finite_group_moment(group, q, i)?.to_string()), Value::Null]))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            let output = if law == Law::FreePoisson {
                table_output(&["k", "moment", "cumulant"], rows)
            } else {
                table_output(
                    &["k", "moment"],
                    rows.into_iter().map(|mut r| {
                        r.truncate(2);
                        r
                    })
                    .collect(),
                )
            };
            (Outcome::ok(output), format)
        }
        Command::Counts {
            cat,
            upto,
            weighting,
            format,
        } => {
            let cat: CategoryId = cat.parse()?;
            let w: Weighting = weighting.parse()?;
            let rows = (0..=upto)
                .map(|k| Ok(vec![json!(k), big(&character_count(&cat, k, &w)?)]))
                .collect::<Result<Vec<_>>>()?;
            (Outcome::ok(table_output(&["k", "count"], rows)), format)
        }
        Command::Table {
            identity,
            upto,
            jobs,
            format,
        } => {
            let identity: Identity = identity.parse()?;
            let t = table(identity, upto, jobs)?;
            let pretty = t.to_csv().replace(',', "  ");
            (
                Outcome {
                    ok: t.all_pass(),
                    output: Output::Text {
                        json: t.to_json_value(),
                        csv: t.to_csv(),
                        pretty,
                    },
                },
                format,
            )
        }
        Command::WitnessSearch {
            p,
            q,
            d,
            budget,
            seed,
            format,
        } => {
            let found = witness_search(p, q, d, budget, seed)?;
            let v = match found {
                None => json!({"found": false, "d": d, "budget": budget, "seed": seed}),
                Some(u) => {
                    let report = check(&u, RelationPreset::Hpq, p, q, 1e-6)?;
                    json!({
                        "found": true,
                        "d": d,
                        "budget": budget,
                        "seed": seed,
                        "model": u.to_json_value(),
                        "report": report.to_json_value(),
                    })
                }
            };
            (Outcome::ok(Output::Value(v)), format)
        }
    })
}

fn model_output(u: &BlockMatrixModel) -> Output {
    let mut csv = String::from("z,y,r,s,re,im\n");
    for z in 0..u.n() {
        for y in 0..u.n() {
            let e = u.entry(z, y);
            for r in 0..u.d() {
                for s in 0..u.d() {
                    csv.push_str(&format!("{z},{y},{r},{s},{},{}\n", e[(r, s)].re, e[(r, s)].im));
                }
            }
        }
    }
    let json = u.to_json_value();
    let pretty = format!("{}\n", serde_json::to_string_pretty(&json).expect("serializable"));
    Output::Text { json, csv, pretty }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::PrecondFailed(_) => 1,
        _ => 2,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code: 0 on success, 1 on a failed verification, 2 on a usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match execute(cli.command) {
        Ok((outcome, format)) => {
            let _ = write!(out, "{}", render(&outcome.output, format));
            if outcome.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if exit_code_for(&e) == 2 {
                let _ = writeln!(err, "Run 'easyq --help' for usage.");
            }
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("easyq").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn count_table() {
        let (code, out, _) = run_str(&["count", "--cat", "nc", "--upto", "6"]);
        assert_eq!(code, 0);
        assert_eq!(out, "k,count\n0,1\n1,1\n2,2\n3,5\n4,14\n5,42\n6,132\n");
    }

    #[test]
    fn gram_scalar() {
        let (code, out, _) = run_str(&["gram", "--cat", "nc2", "--k", "4", "--n", "3"]);
        assert_eq!((code, out.as_str()), (0, "2\n"));
        let (_, out, _) = run_str(&["gram", "--cat", "nc2", "--k", "4", "--n", "3", "--format", "json"]);
        assert_eq!(out, "{\"rank\":2}\n");
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run_str(&["count", "--cat", "zz", "--k", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("unsupported category"));
        let (code, _, err) = run_str(&["frobnicate"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"));
        let (code, _, _) = run_str(&["count", "--cat", "p", "--k", "40"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn verify_sample_and_failure() {
        let args = ["verify", "--preset", "hpq", "--p", "2", "--q", "1", "--sample", "torus-h", "--seed", "7"];
        let (code, out, _) = run_str(&args);
        assert_eq!(code, 0, "{out}");
        let (code, out, _) = run_str(&["verify", "--preset", "spq", "--p", "2", "--q", "1", "--sample", "o"]);
        assert_eq!(code, 1);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pass"], json!(false));
    }

    #[test]
    fn output_is_deterministic_across_jobs() {
        let base = ["verify", "--sample", "b", "--p", "1", "--q", "2", "--samples", "6", "--intertwiners"];
        let one = run_str(&[&base[..], &["--jobs", "1"]].concat());
        let four = run_str(&[&base[..], &["--jobs", "4"]].concat());
        assert_eq!(one.0, 0, "{}", one.1);
        assert_eq!(one, four);
    }

    #[test]
    fn table_and_moments() {
        let (code, out, _) = run_str(&["table", "--identity", "catfree", "--upto", "3"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("k,weightedNC,countProduct,pass\n1,2,2,true\n2,7,7,true\n"));
        let (code, out, _) = run_str(&["moments", "--law", "free-poisson", "--t", "1/2", "--k", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out, "k,moment,cumulant\n1,1/2,1/2\n2,3/4,1/2\n3,11/8,1/2\n");
    }
}
