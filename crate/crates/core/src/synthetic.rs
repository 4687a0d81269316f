//! Seeded synthetic corpora with planted per-shape usefulness.
//!
//! Each corpus draws a set of statement *shapes*. A shape fixes the syntax of
//! the removed line (with holes for identifiers and literals), how it is
//! mutated, and a planted probability that feedback on it is positive.
//! Records instantiate a shape with fresh names and literal values, so all
//! instances of a shape share one indexed template while their source text
//! differs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diff_model::MutantRecord;
use crate::lang_profile::Language;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub records: usize,
    pub shapes: usize,
    /// Probability that a mutant receives any feedback.
    pub feedback_rate: f64,
    /// Probability that feedback, when present, is mixed.
    pub mixed_rate: f64,
    pub mutants_per_changelist: usize,
    /// Timestamps are spread over this many months starting at 2022-01.
    pub months: u32,
    pub seed: u64,
    pub id_prefix: String,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            records: 1000,
            shapes: 40,
            feedback_rate: 0.6,
            mixed_rate: 0.05,
            mutants_per_changelist: 8,
            months: 6,
            seed: 0,
            id_prefix: "syn".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Ident(usize),
    Int,
    Str,
    Text(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub language: Language,
    pieces: Vec<Piece>,
    /// Piece index and replacement text of the mutated operator; `None` deletes the line.
    swap: Option<(usize, &'static str)>,
    /// Planted probability that feedback is positive.
    pub usefulness: f64,
    pub kill_rate: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub records: Vec<MutantRecord>,
    /// Shape index of each record.
    pub shape_of: Vec<usize>,
    pub shapes: Vec<Shape>,
}

const STEMS: [&str; 20] = [
    "val", "item", "node", "buf", "idx", "res", "acc", "tmp", "cfg", "ctx", "req", "resp", "elem", "cnt", "total",
    "sum", "key", "data", "user", "path",
];
const OPERATORS: [&str; 6] = ["+", "-", "*", "<", ">=", "=="];

struct ShapeBuilder<'r, R: Rng> {
    rng: &'r mut R,
    pieces: Vec<Piece>,
    idents: usize,
}

impl<R: Rng> ShapeBuilder<'_, R> {
    fn ident(&mut self) {
        let k = if self.idents > 0 && self.rng.gen_bool(0.3) {
            self.rng.gen_range(0..self.idents)
        } else {
            self.idents += 1;
            self.idents - 1
        };
        self.pieces.push(Piece::Ident(k));
    }

    fn text(&mut self, t: &'static str) {
        self.pieces.push(Piece::Text(t));
    }

    fn term(&mut self, depth: usize) {
        match self.rng.gen_range(0..10) {
            0..=3 => self.ident(),
            4 | 5 => self.pieces.push(Piece::Int),
            6 => self.pieces.push(Piece::Str),
            7 => {
                self.ident();
                self.text(".");
                self.ident();
            }
            _ if depth < 2 => {
                self.ident();
                self.text("(");
                let args = self.rng.gen_range(0..3);
                for i in 0..args {
                    if i > 0 {
                        self.text(",");
                    }
                    self.expr(depth + 1);
                }
                self.text(")");
            }
            _ => self.ident(),
        }
    }

    fn expr(&mut self, depth: usize) {
        self.term(depth);
        for _ in 0..self.rng.gen_range(0..3) {
            let op = *OPERATORS.choose(self.rng).expect("non-empty");
            self.text(op);
            self.term(depth);
        }
    }
}

fn build_shape<R: Rng>(rng: &mut R) -> Shape {
    let language = *Language::ALL.choose(rng).expect("non-empty");
    let semicolon = matches!(language, Language::Java | Language::Cpp | Language::TypeScript);
    let mut b = ShapeBuilder {
        rng,
        pieces: Vec::new(),
        idents: 0,
    };
    match b.rng.gen_range(0..4) {
        0 => {
            b.ident();
            b.text("=");
            b.expr(0);
        }
        1 => {
            b.ident();
            b.text(".");
            b.ident();
            b.text("(");
            b.expr(1);
            b.text(")");
        }
        2 => {
            b.text("return");
            b.expr(0);
        }
        _ => {
            b.text("if");
            match language {
                Language::Python => {
                    b.expr(0);
                    b.text(":");
                    b.text("return");
                    b.ident();
                }
                Language::Go => {
                    b.expr(0);
                    b.text("{");
                    b.text("return");
                    b.ident();
                    b.text("}");
                }
                _ => {
                    b.text("(");
                    b.expr(0);
                    b.text(")");
                    b.text("{");
                    b.text("return");
                    b.ident();
                    b.text(";");
                    b.text("}");
                }
            }
        }
    }
    let ends_with_brace = matches!(b.pieces.last(), Some(Piece::Text("}")));
    if semicolon && !ends_with_brace {
        b.text(";");
    }
    let ops: Vec<usize> = b
        .pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| matches!(p, Piece::Text(t) if OPERATORS.contains(t)))
        .map(|(i, _)| i)
        .collect();
    let swap = match ops.choose(b.rng) {
        Some(&i) if b.rng.gen_bool(0.7) => {
            let Piece::Text(current) = b.pieces[i] else { unreachable!() };
            let others: Vec<&'static str> = OPERATORS.iter().copied().filter(|o| *o != current).collect();
            Some((i, *others.choose(b.rng).expect("non-empty")))
        }
        _ => None,
    };
    let pieces = b.pieces;
    Shape {
        language,
        pieces,
        swap,
        usefulness: rng.gen_range(0.05..0.95),
        kill_rate: rng.gen_range(0.0..0.8),
    }
}

fn random_name<R: Rng>(rng: &mut R) -> String {
    format!("{}{}", STEMS.choose(rng).expect("non-empty"), rng.gen_range(0..50))
}

fn instantiate<R: Rng>(shape: &Shape, rng: &mut R) -> (String, Option<String>) {
    let mut names: Vec<String> = Vec::new();
    // Distinct literal values keep the indexed template fixed per shape.
    let mut literals: Vec<String> = Vec::new();
    let mut removed = Vec::with_capacity(shape.pieces.len());
    let mut added = Vec::with_capacity(shape.pieces.len());
    for (i, piece) in shape.pieces.iter().enumerate() {
        let text = match piece {
            Piece::Ident(k) => {
                while names.len() <= *k {
                    let name = random_name(rng);
                    if !names.contains(&name) {
                        names.push(name);
                    }
                }
                names[*k].clone()
            }
            Piece::Int | Piece::Str => loop {
                let value = match piece {
                    Piece::Int => rng.gen_range(0..100).to_string(),
                    _ => format!("\"s{}\"", rng.gen_range(0..100)),
                };
                if !literals.contains(&value) {
                    literals.push(value.clone());
                    break value;
                }
            },
            Piece::Text(t) => (*t).to_owned(),
        };
        let mutated = match shape.swap {
            Some((j, replacement)) if j == i => replacement.to_owned(),
            _ => text.clone(),
        };
        removed.push(text);
        added.push(mutated);
    }
    let indent = "    ";
    let removed = format!("{indent}{}", removed.join(" "));
    let added = shape.swap.map(|_| format!("{indent}{}", added.join(" ")));
    (removed, added)
}

fn context_line<R: Rng>(language: Language, rng: &mut R) -> String {
    let semicolon = matches!(language, Language::Java | Language::Cpp | Language::TypeScript);
    format!(
        "    {} = {} + {}{}",
        random_name(rng),
        random_name(rng),
        rng.gen_range(0..10),
        if semicolon { ";" } else { "" }
    )
}

fn snapshots<R: Rng>(rng: &mut R, len: usize, any: bool) -> Vec<bool> {
    let mut v = vec![false; len];
    if any {
        let i = rng.gen_range(0..len);
        v[i] = true;
    }
    v
}

fn kill_list<R: Rng>(rng: &mut R, len: usize, killed: bool) -> Vec<bool> {
    if !killed {
        return vec![false; len];
    }
    match rng.gen_range(0..3) {
        0 if len > 1 => {
            // eventually killed
            let first = rng.gen_range(1..len);
            (0..len).map(|i| i >= first).collect()
        }
        1 if len > 2 => {
            // mixed
            let mut v = vec![true; len];
            v[len - 1] = false;
            v
        }
        _ => vec![true; len],
    }
}

fn extension(language: Language) -> &'static str {
    match language {
        Language::Python => "py",
        Language::Java => "java",
        Language::Cpp => "cc",
        Language::Go => "go",
        Language::TypeScript => "ts",
    }
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shapes: Vec<Shape> = (0..spec.shapes.max(1)).map(|_| build_shape(&mut rng)).collect();
    let mut records = Vec::with_capacity(spec.records);
    let mut shape_of = Vec::with_capacity(spec.records);
    let per_cl = spec.mutants_per_changelist.max(1);
    for i in 0..spec.records {
        // Skewed toward low shape indices.
        let u: f64 = rng.gen();
        let s = ((shapes.len() as f64) * u * u) as usize;
        let shape = &shapes[s.min(shapes.len() - 1)];
        let (removed, added) = instantiate(shape, &mut rng);
        let mut diff = format!(" {}\n-{removed}", context_line(shape.language, &mut rng));
        if let Some(a) = added {
            diff.push_str(&format!("\n+{a}"));
        }
        diff.push_str(&format!("\n {}", context_line(shape.language, &mut rng)));

        let len = rng.gen_range(1..=3);
        let (pos, neg) = if rng.gen_bool(spec.feedback_rate) {
            if rng.gen_bool(spec.mixed_rate) {
                (true, true)
            } else if rng.gen_bool(shape.usefulness) {
                (true, false)
            } else {
                (false, true)
            }
        } else {
            (false, false)
        };
        let killed = rng.gen_bool(shape.kill_rate);
        let month = 1 + (i as u64 * spec.months.max(1) as u64 / spec.records.max(1) as u64);
        records.push(MutantRecord {
            mutant_id: format!("{}{i}", spec.id_prefix),
            changelist_id: format!("{}-cl{}", spec.id_prefix, i / per_cl),
            filename: format!("src/file{}.{}", i % 5, extension(shape.language)),
            language: shape.language,
            diff,
            pos_feedback: snapshots(&mut rng, len, pos),
            neg_feedback: snapshots(&mut rng, len, neg),
            killed: kill_list(&mut rng, len, killed),
            operator: None,
            timestamp: Some(format!("{}-{:02}-15", 2022 + (month - 1) / 12, 1 + (month - 1) % 12)),
        });
        shape_of.push(s.min(shapes.len() - 1));
    }
    SyntheticCorpus {
        records,
        shape_of,
        shapes,
    }
}
