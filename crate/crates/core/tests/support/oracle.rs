//! Random loop-free scripts paired with a concrete taint interpreter.
//!
//! The generator builds a program as data and renders it to script text. The
//! interpreter executes the data form on concrete frames whose cells are
//! tagged with the (source, column) they came from, so the result is the
//! exact set of source columns that reach each `fit` call and each write.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use depmap_core::model::ActivityAnalysis;
use rand::seq::SliceRandom;
use rand::Rng;

const SOURCES: usize = 5;
const COLUMNS: &[&str] = &["c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7"];
const EXTERNAL: &[&str] = &["train_test_split", "np.concatenate", "normalize", "pd.concat"];
const METHODS: &[&str] = &["merge", "join", "dropna", "fillna", "astype"];

#[derive(Clone, Debug)]
pub enum GStmt {
    Read { dst: String, src: usize },
    Project { dst: String, var: String, cols: Vec<String> },
    Column { dst: String, var: String, col: String },
    External { dst: String, func: String, args: Vec<String> },
    Method { dst: String, recv: String, method: String, args: Vec<String> },
    Copy { dst: String, src: String },
    Const { dst: String },
    BinOp { dst: String, a: String, b: String },
    Pair { dsts: [String; 2], srcs: [String; 2] },
    Unpack { dsts: [String; 2], func: String, args: Vec<String> },
    NewModel { m: String },
    Fit { dst: Option<String>, m: String, args: Vec<String> },
    Predict { dst: String, m: String, arg: String },
    Write { var: String, target: usize },
    If { a: i64, b: i64, then: Vec<GStmt>, other: Vec<GStmt> },
}

#[derive(Clone, Debug)]
pub struct Program {
    pub stmts: Vec<GStmt>,
    /// Concrete column schema of each source file.
    pub schemas: Vec<Vec<String>>,
}

pub type Taint = BTreeSet<(String, String)>;

#[derive(Clone, Debug, Default)]
pub struct Concrete {
    pub mapping: Taint,
    pub writes: BTreeMap<String, Taint>,
    pub fit_called: bool,
}

pub fn source_name(i: usize) -> String {
    format!("file{i}.csv")
}

pub fn output_name(i: usize) -> String {
    format!("out{i}.csv")
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    vars: Vec<String>,
    models: Vec<String>,
    fresh: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn var(&mut self) -> String {
        if self.vars.is_empty() || self.rng.gen_bool(0.35) {
            self.fresh += 1;
            format!("v{}", self.fresh)
        } else {
            self.vars.choose(self.rng).unwrap().clone()
        }
    }

    fn used(&mut self) -> String {
        self.vars.choose(self.rng).cloned().unwrap_or_else(|| "v0".into())
    }

    fn args(&mut self) -> Vec<String> {
        let n = self.rng.gen_range(1..=3);
        (0..n).map(|_| self.used()).collect()
    }

    fn cols(&mut self) -> Vec<String> {
        let n = self.rng.gen_range(1..=3);
        let mut c: Vec<String> = COLUMNS.choose_multiple(self.rng, n).map(|s| s.to_string()).collect();
        c.sort();
        c
    }

    fn define(&mut self, v: &str) {
        if !self.vars.iter().any(|x| x == v) {
            self.vars.push(v.to_string());
        }
    }

    fn stmt(&mut self, depth: usize) -> GStmt {
        let pick = self.rng.gen_range(0..if depth < 2 { 16 } else { 15 });
        let s = match pick {
            0 | 1 => GStmt::Read { dst: self.var(), src: self.rng.gen_range(0..SOURCES) },
            2 | 3 => GStmt::Project { dst: self.var(), var: self.used(), cols: self.cols() },
            4 => {
                GStmt::Column { dst: self.var(), var: self.used(), col: COLUMNS.choose(self.rng).unwrap().to_string() }
            }
            5 => GStmt::External {
                dst: self.var(),
                func: EXTERNAL.choose(self.rng).unwrap().to_string(),
                args: self.args(),
            },
            6 => GStmt::Method {
                dst: self.var(),
                recv: self.used(),
                method: METHODS.choose(self.rng).unwrap().to_string(),
                args: if self.rng.gen_bool(0.5) { self.args() } else { Vec::new() },
            },
            7 => GStmt::Copy { dst: self.var(), src: self.used() },
            8 => GStmt::Const { dst: self.var() },
            9 => GStmt::BinOp { dst: self.var(), a: self.used(), b: self.used() },
            10 => GStmt::Pair { dsts: [self.var(), self.var()], srcs: [self.used(), self.used()] },
            11 => GStmt::Unpack { dsts: [self.var(), self.var()], func: "train_test_split".into(), args: self.args() },
            12 => {
                let m = format!("model{}", self.models.len());
                self.models.push(m.clone());
                GStmt::NewModel { m }
            }
            13 => match self.models.choose(self.rng).cloned() {
                Some(m) if self.rng.gen_bool(0.5) => GStmt::Predict { dst: self.var(), m, arg: self.used() },
                Some(m) => GStmt::Fit { dst: self.rng.gen_bool(0.3).then(|| self.var()), m, args: self.args() },
                None => GStmt::Const { dst: self.var() },
            },
            14 => GStmt::Write { var: self.used(), target: self.rng.gen_range(0..3) },
            _ => {
                let then = self.block(depth + 1);
                let other = if self.rng.gen_bool(0.6) { self.block(depth + 1) } else { Vec::new() };
                GStmt::If { a: self.rng.gen_range(0..5), b: self.rng.gen_range(0..5), then, other }
            }
        };
        match &s {
            GStmt::Read { dst, .. }
            | GStmt::Project { dst, .. }
            | GStmt::Column { dst, .. }
            | GStmt::External { dst, .. }
            | GStmt::Method { dst, .. }
            | GStmt::Copy { dst, .. }
            | GStmt::Const { dst }
            | GStmt::BinOp { dst, .. }
            | GStmt::Predict { dst, .. } => {
                let d = dst.clone();
                self.define(&d);
            }
            GStmt::Fit { dst: Some(d), .. } => {
                let d = d.clone();
                self.define(&d);
            }
            GStmt::Pair { dsts, .. } | GStmt::Unpack { dsts, .. } => {
                for d in dsts.clone() {
                    self.define(&d);
                }
            }
            _ => {}
        }
        s
    }

    fn block(&mut self, depth: usize) -> Vec<GStmt> {
        let n = self.rng.gen_range(1..=4);
        (0..n).map(|_| self.stmt(depth)).collect()
    }
}

pub fn random_program(rng: &mut impl Rng) -> Program {
    let schemas = (0..SOURCES)
        .map(|_| {
            let n = rng.gen_range(2..=5);
            let mut c: Vec<String> = COLUMNS.choose_multiple(rng, n).map(|s| s.to_string()).collect();
            c.sort();
            c
        })
        .collect();
    let mut g = Gen { rng, vars: Vec::new(), models: Vec::new(), fresh: 0 };
    let mut stmts = vec![GStmt::Read { dst: "v0".into(), src: 0 }, GStmt::NewModel { m: "model".into() }];
    g.vars.push("v0".into());
    g.models.push("model".into());
    let n = g.rng.gen_range(4..=25);
    for _ in 0..n {
        let s = g.stmt(0);
        stmts.push(s);
    }
    let v = g.used();
    stmts.push(GStmt::Fit { dst: None, m: "model".into(), args: vec![v] });
    Program { stmts, schemas }
}

impl Program {
    pub fn render(&self) -> String {
        let mut out = String::from("import pandas as pd\nimport numpy as np\n");
        render_block(&self.stmts, 0, &mut out);
        out
    }
}

fn render_block(stmts: &[GStmt], indent: usize, out: &mut String) {
    let pad = "    ".repeat(indent);
    for s in stmts {
        let line = match s {
            GStmt::Read { dst, src } => format!("{dst} = pd.read_csv(\"{}\")", source_name(*src)),
            GStmt::Project { dst, var, cols } => {
                let list: Vec<String> = cols.iter().map(|c| format!("\"{c}\"")).collect();
                format!("{dst} = {var}[[{}]]", list.join(", "))
            }
            GStmt::Column { dst, var, col } => format!("{dst} = {var}[\"{col}\"]"),
            GStmt::External { dst, func, args } => format!("{dst} = {func}({})", args.join(", ")),
            GStmt::Method { dst, recv, method, args } => format!("{dst} = {recv}.{method}({})", args.join(", ")),
            GStmt::Copy { dst, src } => format!("{dst} = {src}"),
            GStmt::Const { dst } => format!("{dst} = 0"),
            GStmt::BinOp { dst, a, b } => format!("{dst} = {a} + {b}"),
            GStmt::Pair { dsts, srcs } => format!("{}, {} = {}, {}", dsts[0], dsts[1], srcs[0], srcs[1]),
            GStmt::Unpack { dsts, func, args } => format!("{}, {} = {func}({})", dsts[0], dsts[1], args.join(", ")),
            GStmt::NewModel { m } => format!("{m} = LogisticRegression()"),
            GStmt::Fit { dst: Some(d), m, args } => format!("{d} = {m}.fit({})", args.join(", ")),
            GStmt::Fit { dst: None, m, args } => format!("{m}.fit({})", args.join(", ")),
            GStmt::Predict { dst, m, arg } => format!("{dst} = {m}.predict({arg})"),
            GStmt::Write { var, target } => format!("{var}.to_csv(\"{}\")", output_name(*target)),
            GStmt::If { a, b, then, other } => {
                out.push_str(&format!("{pad}if {a} < {b}:\n"));
                render_block(then, indent + 1, out);
                if !other.is_empty() {
                    out.push_str(&format!("{pad}else:\n"));
                    render_block(other, indent + 1, out);
                }
                continue;
            }
        };
        out.push_str(&pad);
        out.push_str(&line);
        out.push('\n');
    }
}

/// Executes the program on tagged concrete frames.
pub fn run_concrete(p: &Program) -> Concrete {
    let mut env: BTreeMap<String, Taint> = BTreeMap::new();
    let mut out = Concrete::default();
    exec(&p.stmts, p, &mut env, &mut out);
    out
}

fn exec(stmts: &[GStmt], p: &Program, env: &mut BTreeMap<String, Taint>, out: &mut Concrete) {
    let get = |env: &BTreeMap<String, Taint>, v: &str| env.get(v).cloned().unwrap_or_default();
    let union =
        |env: &BTreeMap<String, Taint>, vs: &[String]| -> Taint { vs.iter().flat_map(|v| get(env, v)).collect() };
    for s in stmts {
        match s {
            GStmt::Read { dst, src } => {
                let frame = p.schemas[*src].iter().map(|c| (source_name(*src), c.clone())).collect();
                env.insert(dst.clone(), frame);
            }
            GStmt::Project { dst, var, cols } => {
                let frame = get(env, var).into_iter().filter(|(_, c)| cols.contains(c)).collect();
                env.insert(dst.clone(), frame);
            }
            GStmt::Column { dst, var, col } => {
                let frame = get(env, var).into_iter().filter(|(_, c)| c == col).collect();
                env.insert(dst.clone(), frame);
            }
            GStmt::External { dst, args, .. } => {
                let v = union(env, args);
                env.insert(dst.clone(), v);
            }
            GStmt::Method { dst, recv, args, .. } => {
                let mut v = union(env, args);
                v.extend(get(env, recv));
                env.insert(dst.clone(), v);
            }
            GStmt::Copy { dst, src } => {
                let v = get(env, src);
                env.insert(dst.clone(), v);
            }
            GStmt::Const { dst } | GStmt::NewModel { m: dst } => {
                env.insert(dst.clone(), Taint::new());
            }
            GStmt::BinOp { dst, a, b } => {
                let v = union(env, &[a.clone(), b.clone()]);
                env.insert(dst.clone(), v);
            }
            GStmt::Pair { dsts, srcs } => {
                let (a, b) = (get(env, &srcs[0]), get(env, &srcs[1]));
                env.insert(dsts[0].clone(), a);
                env.insert(dsts[1].clone(), b);
            }
            GStmt::Unpack { dsts, args, .. } => {
                let v = union(env, args);
                env.insert(dsts[0].clone(), v.clone());
                env.insert(dsts[1].clone(), v);
            }
            GStmt::Fit { dst, m, args } => {
                let v = union(env, args);
                out.mapping.extend(v.iter().cloned());
                out.fit_called = true;
                env.entry(m.clone()).or_default().extend(v.iter().cloned());
                if let Some(d) = dst {
                    env.insert(d.clone(), v);
                }
            }
            GStmt::Predict { dst, m, arg } => {
                let v = union(env, &[m.clone(), arg.clone()]);
                env.insert(dst.clone(), v);
            }
            GStmt::Write { var, target } => {
                let v = get(env, var);
                out.writes.entry(output_name(*target)).or_default().extend(v);
            }
            GStmt::If { a, b, then, other } => {
                exec(if a < b { then } else { other }, p, env, out);
            }
        }
    }
}

/// Checks that every concretely reached source column is covered by the
/// static result.
pub fn covers(stat: &ActivityAnalysis, conc: &Concrete) -> Result<(), String> {
    for (s, c) in &conc.mapping {
        if !stat.mapping.get(s).is_some_and(|cols| cols.contains(c)) {
            return Err(format!("mapping misses {s}^{c}; static {}", stat.mapping));
        }
    }
    for (target, taint) in &conc.writes {
        let Some(w) = stat.writes.get(target) else {
            return Err(format!("missing write {target}"));
        };
        for (s, c) in taint {
            if !w.get(s).is_some_and(|cols| cols.contains(c)) {
                return Err(format!("write {target} misses {s}^{c}; static {w}"));
            }
        }
    }
    if conc.fit_called && !stat.has_sink {
        return Err("fit executed but has_sink is false".into());
    }
    Ok(())
}
