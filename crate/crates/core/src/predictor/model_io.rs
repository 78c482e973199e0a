//! Versioned text format for trained predictors.
//!
//! ```text
//! NILEZTN-MODEL v1
//! [normalization]
//! cap_max 560
//! [bilstm]
//! window 10
//! hidden 16
//! forward.weights 64 17
//! <one matrix row per line>
//! forward.bias 64
//! ...
//! [trees]
//! count 50
//! shrinkage 0.1
//! max_depth 3
//! tree 0
//! S 3 0.51
//! L 0.002
//! L -0.001
//! ```
//!
//! Trees are written in preorder: `S feature threshold` for a split followed
//! by its left then right subtree, `L value` for a leaf. Numbers use the
//! shortest representation that parses back to the same value.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{BiLstmParams, HybridPredictor, Normalizer, PredictorError, RegressionTree, ResidualEnsemble};
use crate::Real;

pub const MODEL_HEADER: &str = "NILEZTN-MODEL v1";

fn write_row<T: Real>(out: &mut String, row: &[T]) {
    let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
    out.push_str(&cells.join(" "));
    out.push('\n');
}

fn write_tree<T: Real>(out: &mut String, tree: &RegressionTree<T>) {
    match tree {
        RegressionTree::Leaf(v) => {
            let _ = writeln!(out, "L {v}");
        }
        RegressionTree::Split { feature, threshold, left, right } => {
            let _ = writeln!(out, "S {feature} {threshold}");
            write_tree(out, left);
            write_tree(out, right);
        }
    }
}

pub fn save_model<T: Real>(model: &HybridPredictor<T>) -> String {
    let mut out = String::new();
    let p = model.bilstm();
    let h = p.hidden();
    let _ = writeln!(out, "{MODEL_HEADER}\n[normalization]\ncap_max {}", model.normalizer().cap_max());
    let _ = writeln!(out, "[bilstm]\nwindow {}\nhidden {h}", p.window());
    for (name, cell) in [("forward", p.forward_cell()), ("backward", p.backward_cell())] {
        let _ = writeln!(out, "{name}.weights {} {}", 4 * h, 1 + h);
        for row in cell.weights.chunks(1 + h) {
            write_row(&mut out, row);
        }
        let _ = writeln!(out, "{name}.bias {}", 4 * h);
        write_row(&mut out, cell.bias);
    }
    let _ = writeln!(out, "head.weights {}", 2 * h);
    write_row(&mut out, p.head_weights());
    let _ = writeln!(out, "head.bias\n{}", p.head_bias());
    let b = model.booster();
    let _ = writeln!(out, "[trees]\ncount {}\nshrinkage {}\nmax_depth {}", b.trees().len(), b.shrinkage(), b.max_depth());
    for (i, t) in b.trees().iter().enumerate() {
        let _ = writeln!(out, "tree {i}");
        write_tree(&mut out, t);
    }
    out
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> PredictorError {
        PredictorError::ModelFormat { line: self.pos.max(1), message: message.into() }
    }

    fn next(&mut self) -> Result<&'a str, PredictorError> {
        let line = self.lines.get(self.pos).copied();
        self.pos += 1;
        line.map(str::trim).ok_or_else(|| self.err("unexpected end of file"))
    }

    fn expect(&mut self, exact: &str) -> Result<(), PredictorError> {
        let line = self.next()?;
        if line != exact {
            return Err(self.err(format!("expected '{exact}', found '{line}'")));
        }
        Ok(())
    }

    fn parse<V: FromStr>(&self, s: &str) -> Result<V, PredictorError> {
        s.parse().map_err(|_| self.err(format!("cannot parse '{s}'")))
    }

    /// `key v1 v2 …` → the values.
    fn keyed<V: FromStr>(&mut self, key: &str, count: usize) -> Result<Vec<V>, PredictorError> {
        let line = self.next()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected '{key}', found '{line}'")));
        }
        let vals: Vec<V> = parts.map(|p| self.parse(p)).collect::<Result<_, _>>()?;
        if vals.len() != count {
            return Err(self.err(format!("'{key}' takes {count} value(s)")));
        }
        Ok(vals)
    }

    fn row<T: Real>(&mut self, len: usize) -> Result<Vec<T>, PredictorError> {
        let line = self.next()?;
        let vals: Vec<T> = line.split_whitespace().map(|p| self.parse(p)).collect::<Result<_, _>>()?;
        if vals.len() != len {
            return Err(self.err(format!("expected {len} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn tree<T: Real>(&mut self, depth: usize, max_depth: usize) -> Result<RegressionTree<T>, PredictorError> {
        let line = self.next()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["L", v] => Ok(RegressionTree::Leaf(self.parse(v)?)),
            ["S", f, t] if depth < max_depth => {
                let (feature, threshold) = (self.parse(f)?, self.parse(t)?);
                let left = Box::new(self.tree(depth + 1, max_depth)?);
                let right = Box::new(self.tree(depth + 1, max_depth)?);
                Ok(RegressionTree::Split { feature, threshold, left, right })
            }
            ["S", ..] => Err(self.err("tree deeper than max_depth")),
            _ => Err(self.err(format!("expected tree node, found '{line}'"))),
        }
    }
}

pub fn load_model<T: Real>(text: &str) -> Result<HybridPredictor<T>, PredictorError> {
    let mut r = Lines { lines: text.lines().collect(), pos: 0 };
    r.expect(MODEL_HEADER)?;
    r.expect("[normalization]")?;
    let cap_max: T = r.keyed("cap_max", 1)?[0];
    let norm = Normalizer::new(cap_max).map_err(|e| r.err(e.to_string()))?;
    r.expect("[bilstm]")?;
    let window: usize = r.keyed("window", 1)?[0];
    let hidden: usize = r.keyed("hidden", 1)?[0];
    if window == 0 || hidden == 0 {
        return Err(r.err("window and hidden must be positive"));
    }
    let h = hidden;
    let mut theta = Vec::new();
    for name in ["forward", "backward"] {
        let dims: Vec<usize> = r.keyed(&format!("{name}.weights"), 2)?;
        if dims != [4 * h, 1 + h] {
            return Err(r.err(format!("{name}.weights must be {} x {}", 4 * h, 1 + h)));
        }
        for _ in 0..4 * h {
            theta.extend(r.row::<T>(1 + h)?);
        }
        if r.keyed::<usize>(&format!("{name}.bias"), 1)? != [4 * h] {
            return Err(r.err(format!("{name}.bias must have {} values", 4 * h)));
        }
        theta.extend(r.row::<T>(4 * h)?);
    }
    if r.keyed::<usize>("head.weights", 1)? != [2 * h] {
        return Err(r.err(format!("head.weights must have {} values", 2 * h)));
    }
    theta.extend(r.row::<T>(2 * h)?);
    r.expect("head.bias")?;
    theta.extend(r.row::<T>(1)?);
    let bilstm = BiLstmParams::from_theta(window, hidden, theta).map_err(|e| r.err(e.to_string()))?;

    r.expect("[trees]")?;
    let count: usize = r.keyed("count", 1)?[0];
    let shrinkage: T = r.keyed("shrinkage", 1)?[0];
    let max_depth: usize = r.keyed("max_depth", 1)?[0];
    let mut trees = Vec::with_capacity(count);
    for i in 0..count {
        r.expect(&format!("tree {i}"))?;
        trees.push(r.tree(0, max_depth)?);
    }
    if let Some(rest) = r.lines[r.pos.min(r.lines.len())..].iter().position(|l| !l.trim().is_empty()) {
        r.pos += rest + 1;
        return Err(r.err("unexpected trailing content"));
    }
    let booster = ResidualEnsemble::new(trees, shrinkage, max_depth).map_err(|e| r.err(e.to_string()))?;
    Ok(HybridPredictor::new(bilstm, booster, norm))
}
