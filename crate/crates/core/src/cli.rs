//! The `omqlab` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 dialect, schema or
//! precondition violation, 4 unknown verdict or exhausted budget, 5 cap exceeded.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::chase::oblivious_chase;
use crate::dllitef::{decide_ubcq1_equiv, rew};
use crate::entailment::is_consistent;
use crate::error::{Error, Result};
use crate::eval::{evaluate_fpt, evaluate_naive, EvalResult};
use crate::graphalg::{cq_treewidth, k_unravel, unravel1_at};
use crate::homtools::core;
use crate::model::{Database, Dialect, Name, Omq, Ontology, Schema, Ucq};
use crate::pebble::pebble_answers;
use crate::surface::{
    parse_database, parse_ontology, parse_query, parse_schema, serialize_database, serialize_ontology,
    serialize_query, Answers,
};
use crate::treelike::{
    contains_dllite_horn, contains_full_schema, counterexample_search, decide_tw_equiv_general, rewriting,
    ucq_k_approximation, Counterexample, TwEquivVerdict, DEFAULT_BUDGET,
};

#[derive(Parser, Debug)]
#[command(name = "omqlab", version, about = "Ontology-mediated query toolkit")]
struct Cli {
    /// Worker threads for internal parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct OmqArgs {
    /// Ontology file; omitted means the empty ontology.
    #[arg(long)]
    onto: Option<PathBuf>,
    /// Query file with one or more rules.
    #[arg(long)]
    query: PathBuf,
    /// `full` or a schema file.
    #[arg(long, default_value = "full")]
    schema: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Naive,
    Fpt,
    Pebble,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Certain answers of an OMQ on a database.
    Eval {
        #[command(flatten)]
        omq: OmqArgs,
        #[arg(long)]
        db: PathBuf,
        #[arg(long, value_enum, default_value = "naive")]
        algo: Algo,
        #[arg(short, default_value_t = 1)]
        k: usize,
    },
    /// Consistency of a database with an ontology.
    Consistent {
        #[arg(long)]
        onto: Option<PathBuf>,
        #[arg(long)]
        db: PathBuf,
    },
    /// Oblivious chase up to a depth.
    Chase {
        #[arg(long)]
        onto: Option<PathBuf>,
        #[arg(long)]
        db: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Treewidth of every disjunct.
    Treewidth {
        #[arg(long)]
        query: PathBuf,
    },
    /// Core of every disjunct.
    Core {
        #[arg(long)]
        query: PathBuf,
    },
    /// UCQ_k-approximation.
    Approx {
        #[command(flatten)]
        omq: OmqArgs,
        #[arg(short, default_value_t = 1)]
        k: usize,
    },
    /// Whether the OMQ is equivalent to one of treewidth at most k.
    TwEquiv {
        #[command(flatten)]
        omq: OmqArgs,
        #[arg(short, default_value_t = 1)]
        k: usize,
        /// Constants available to the counterexample search.
        #[arg(long, env = "OMQLAB_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Directory receiving witness.cq and witness.dl.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Containment of the first OMQ in the second.
    Contain {
        #[arg(long)]
        onto: Option<PathBuf>,
        #[arg(long)]
        onto2: Option<PathBuf>,
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        query2: PathBuf,
        #[arg(long, default_value = "full")]
        schema: String,
        #[arg(long, env = "OMQLAB_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Rewriting through maximum contractions.
    Rewrite {
        #[command(flatten)]
        omq: OmqArgs,
    },
    /// k-unraveling of a database up to a tuple.
    Unravel {
        #[arg(long)]
        db: PathBuf,
        /// Comma-separated constants; with -k 1 a single constant roots the unraveling.
        #[arg(long, default_value = "")]
        tuple: String,
        #[arg(short, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// DL-Lite^F rewriting into a union of Boolean CQs.
    DlfRew {
        #[command(flatten)]
        omq: OmqArgs,
    },
    /// DL-Lite^F equivalence to a union of treewidth-1 Boolean CQs.
    DlfEquiv1 {
        #[command(flatten)]
        omq: OmqArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// Outcome of a subcommand: text, JSON, and an exit code.
struct Report {
    text: String,
    json: Value,
    code: i32,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { text, json, code: 0 }
    }
}

struct Inputs {
    stdin_used: bool,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String> {
        if path == Path::new("-") {
            if self.stdin_used {
                return Err(Error::Precondition("standard input can be read only once".into()));
            }
            self.stdin_used = true;
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            return Ok(s);
        }
        crate::surface::read_text(path)
    }

    fn ontology(&mut self, path: Option<&PathBuf>) -> Result<Ontology> {
        match path {
            Some(p) => parse_ontology(&self.read(p)?),
            None => Ok(Ontology::empty()),
        }
    }

    fn query(&mut self, path: &Path) -> Result<Ucq> {
        Ok(parse_query(&self.read(path)?)?)
    }

    fn database(&mut self, path: &Path) -> Result<Database> {
        Ok(parse_database(&self.read(path)?)?)
    }

    fn schema(&mut self, spec: &str) -> Result<Schema> {
        if spec == "full" {
            return Ok(Schema::full());
        }
        Ok(parse_schema(&self.read(Path::new(spec))?)?)
    }

    fn omq(&mut self, a: &OmqArgs) -> Result<Omq> {
        let o = self.ontology(a.onto.as_ref())?;
        let q = self.query(&a.query)?;
        let s = self.schema(&a.schema)?;
        Ok(Omq::new(o, s, q))
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 1,
        Error::Parse(_) | Error::InvalidQuery(_) | Error::InvalidDatabase(_) => 2,
        Error::Dialect { .. } | Error::Schema(_) | Error::Precondition(_) | Error::Inconsistent => 3,
        Error::BudgetExhausted(_) => 4,
        Error::CapExceeded(_) => 5,
    }
}

/// Run the CLI on `argv` (including the program name), writing results to
/// `out` and diagnostics to `err`; returns the exit code.
pub fn run(argv: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let mut inputs = Inputs { stdin_used: false };
    match pool.install(|| dispatch(&cli.cmd, &mut inputs)) {
        Ok(r) => {
            let body = if cli.json { format!("{}\n", r.json) } else { r.text };
            let _ = write!(out, "{body}");
            r.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn answers_report(r: &EvalResult, boolean: bool) -> Report {
    let a = Answers::new(r.consistent, r.answers.iter().cloned());
    let mut text = String::new();
    if !r.consistent {
        text.push_str("inconsistent\n");
    }
    if boolean {
        text.push_str(if r.holds() { "true\n" } else { "false\n" });
    } else {
        for t in &a.answers {
            text.push_str(&format!("{}\n", t.join(",")));
        }
    }
    Report::ok(text, serde_json::to_value(&a).expect("answers serialize"))
}

fn counterexample_json(c: &Counterexample) -> Value {
    json!({
        "database": c.database.facts.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "tuple": c.tuple.iter().map(Name::to_string).collect::<Vec<_>>(),
    })
}

fn verdict_report(v: &TwEquivVerdict, out_dir: &Path) -> Result<Report> {
    let mut text = format!("{}\n", v.label());
    let mut j = json!({ "verdict": v.label() });
    let code = match v {
        TwEquivVerdict::Yes(w) => {
            std::fs::create_dir_all(out_dir)?;
            let cq = serialize_query(&w.query);
            let dl = serialize_ontology(&w.ontology);
            std::fs::write(out_dir.join("witness.cq"), &cq)?;
            std::fs::write(out_dir.join("witness.dl"), &dl)?;
            text.push_str(&cq);
            j["witness"] = json!({ "query": cq, "ontology": dl });
            0
        }
        TwEquivVerdict::No(cx) => {
            if let Some(c) = cx {
                text.push_str(&format!("counterexample at ({}):\n", c.tuple.iter().map(Name::as_str).collect::<Vec<_>>().join(",")));
                text.push_str(&serialize_database(&c.database));
                j["counterexample"] = counterexample_json(c);
            }
            0
        }
        TwEquivVerdict::Unknown(why) => {
            text.push_str(&format!("{why}\n"));
            j["reason"] = json!(why);
            4
        }
    };
    Ok(Report { text, json: j, code })
}

fn query_report(q: &Ucq, extra: Value) -> Report {
    let text = serialize_query(q);
    let mut j = json!({ "query": text, "disjuncts": q.disjuncts.len() });
    if let (Value::Object(m), Value::Object(e)) = (&mut j, extra) {
        m.extend(e);
    }
    Report::ok(text, j)
}

fn dispatch(cmd: &Cmd, inputs: &mut Inputs) -> Result<Report> {
    match cmd {
        Cmd::Eval { omq, db, algo, k } => {
            let q = inputs.omq(omq)?;
            let d = inputs.database(db)?;
            let r = match algo {
                Algo::Naive => evaluate_naive(&q, &d)?,
                Algo::Fpt => evaluate_fpt(&q, &d, *k)?,
                Algo::Pebble => pebble_answers(&q, &d, *k)?,
            };
            Ok(answers_report(&r, q.query.arity() == 0))
        }
        Cmd::Consistent { onto, db } => {
            let o = inputs.ontology(onto.as_ref())?;
            let d = inputs.database(db)?;
            let c = is_consistent(&d, &o)?;
            Ok(Report::ok(format!("{c}\n"), json!({ "consistent": c })))
        }
        Cmd::Chase { onto, db, depth } => {
            let o = inputs.ontology(onto.as_ref())?;
            let d = inputs.database(db)?;
            match oblivious_chase(&d, &o, *depth) {
                Ok(c) => Ok(Report::ok(
                    serialize_database(&c.facts),
                    json!({
                        "consistent": true,
                        "facts": c.facts.facts.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                        "provenance": c.provenance_json(),
                    }),
                )),
                Err(Error::Inconsistent) => {
                    Ok(Report::ok("inconsistent\n".into(), json!({ "consistent": false, "facts": [] })))
                }
                Err(e) => Err(e),
            }
        }
        Cmd::Treewidth { query } => {
            let q = inputs.query(query)?;
            let ws: Vec<usize> = q.disjuncts.iter().map(cq_treewidth).collect::<Result<_>>()?;
            let max = ws.iter().copied().max().unwrap_or(0);
            let mut text: String = ws.iter().enumerate().map(|(i, w)| format!("disjunct {}: {w}\n", i + 1)).collect();
            text.push_str(&format!("max: {max}\n"));
            Ok(Report::ok(text, json!({ "disjuncts": ws, "max": max })))
        }
        Cmd::Core { query } => {
            let q = inputs.query(query)?;
            let cores = Ucq { disjuncts: q.disjuncts.iter().map(core).collect() };
            Ok(query_report(&cores, json!({})))
        }
        Cmd::Approx { omq, k } => {
            let q = inputs.omq(omq)?;
            let a = ucq_k_approximation(&q, *k)?;
            Ok(query_report(&a.query, json!({ "k": k })))
        }
        Cmd::TwEquiv { omq, k, budget, out_dir } => {
            let q = inputs.omq(omq)?;
            verdict_report(&decide_tw_equiv_general(&q, *k, *budget)?, out_dir)
        }
        Cmd::Contain { onto, onto2, query, query2, schema, budget } => {
            let o1 = inputs.ontology(onto.as_ref())?;
            let o2 = match onto2 {
                Some(p) => inputs.ontology(Some(p))?,
                None => o1.clone(),
            };
            let s = inputs.schema(schema)?;
            let q1 = Omq::new(o1, s.clone(), inputs.query(query)?);
            let q2 = Omq::new(o2, s, inputs.query(query2)?);
            let horn = |o: &Ontology| matches!(o.dialect, Dialect::DlLiteR | Dialect::DlLiteRHorn);
            let verdict = if q1.schema.full {
                Some(contains_full_schema(&q1, &q2)?)
            } else if horn(&q1.ontology) && horn(&q2.ontology) {
                Some(contains_dllite_horn(&q1, &q2)?)
            } else {
                let found = counterexample_search(&q1, &q2, *budget)?;
                found.counterexample.map(|_| false)
            };
            Ok(match verdict {
                Some(b) => Report::ok(format!("{b}\n"), json!({ "contained": b })),
                None => Report {
                    text: format!("unknown: no counterexample with at most {budget} constants\n"),
                    json: json!({ "contained": Value::Null }),
                    code: 4,
                },
            })
        }
        Cmd::Rewrite { omq } => {
            let q = inputs.omq(omq)?;
            let r = rewriting(&q)?;
            Ok(query_report(&r.query, json!({})))
        }
        Cmd::Unravel { db, tuple, k, depth } => {
            let d = inputs.database(db)?;
            let a: Vec<Name> = tuple.split(',').map(str::trim).filter(|s| !s.is_empty()).map(Name::from).collect();
            let u = if *k == 1 && a.len() == 1 { unravel1_at(&d, &a[0], *depth)? } else { k_unravel(&d, &a, *k, *depth)? };
            let text = serialize_database(&u.database);
            let proj: serde_json::Map<String, Value> =
                u.projection.iter().map(|(c, p)| (c.to_string(), json!(p.as_str()))).collect();
            Ok(Report::ok(
                text,
                json!({
                    "facts": u.database.facts.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    "projection": proj,
                    "bags": u.bags.iter().map(|b| b.iter().map(Name::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
                }),
            ))
        }
        Cmd::DlfRew { omq } => {
            let q = inputs.omq(omq)?;
            Ok(query_report(&rew(&q)?, json!({})))
        }
        Cmd::DlfEquiv1 { omq, out_dir } => {
            let q = inputs.omq(omq)?;
            verdict_report(&decide_ubcq1_equiv(&q)?, out_dir)
        }
    }
}
