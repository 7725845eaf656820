//! Tree evaluation over a feature matrix.
//!
//! Operators are unprotected: division, log, sqrt, exp and reciprocal follow
//! plain IEEE semantics and may produce NaN or infinities, which mark the
//! whole semantics invalid.

use thiserror::Error;

use crate::data::Matrix;
use crate::expr::{ExprTree, FuncSym, Node};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("feature index {index} out of range for {cols} columns")]
    FeatureOutOfRange { index: usize, cols: usize },
}

/// Output vector of a tree on a data partition. `valid` is false as soon as
/// any entry is non-finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Semantics {
    pub values: Vec<f64>,
    pub valid: bool,
}

impl Semantics {
    pub fn from_values(values: Vec<f64>) -> Semantics {
        let valid = values.iter().all(|v| v.is_finite());
        Semantics { values, valid }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-node output vectors of one evaluation pass, in preorder. Reused by the
/// genotype-phenotype mapping so reduction needs no extra tree executions.
#[derive(Clone, Debug)]
pub struct EvalTrace {
    pub node_values: Vec<Vec<f64>>,
}

impl EvalTrace {
    /// True if any node anywhere produced a non-finite entry.
    pub fn any_invalid(&self) -> bool {
        self.node_values
            .iter()
            .any(|v| v.iter().any(|x| !x.is_finite()))
    }
}

fn apply_unary(sym: FuncSym, v: &mut [f64]) {
    match sym {
        FuncSym::Sin => v.iter_mut().for_each(|x| *x = x.sin()),
        FuncSym::Cos => v.iter_mut().for_each(|x| *x = x.cos()),
        FuncSym::Tanh => v.iter_mut().for_each(|x| *x = x.tanh()),
        FuncSym::Square => v.iter_mut().for_each(|x| *x = *x * *x),
        FuncSym::Reciprocal => v.iter_mut().for_each(|x| *x = 1.0 / *x),
        FuncSym::Sqrt => v.iter_mut().for_each(|x| *x = x.sqrt()),
        FuncSym::Exp => v.iter_mut().for_each(|x| *x = x.exp()),
        FuncSym::Log => v.iter_mut().for_each(|x| *x = x.ln()),
        _ => unreachable!("binary symbol applied as unary"),
    }
}

fn apply_binary(sym: FuncSym, a: &mut [f64], b: &[f64]) {
    match sym {
        FuncSym::Add => a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
        FuncSym::Sub => a.iter_mut().zip(b).for_each(|(x, y)| *x -= y),
        FuncSym::Mul => a.iter_mut().zip(b).for_each(|(x, y)| *x *= y),
        FuncSym::Div => a.iter_mut().zip(b).for_each(|(x, y)| *x /= y),
        _ => unreachable!("unary symbol applied as binary"),
    }
}

fn eval_node(
    node: &Node,
    features: &Matrix,
    trace: &mut Option<&mut Vec<Vec<f64>>>,
) -> Result<Vec<f64>, EvalError> {
    let slot = trace.as_mut().map(|t| {
        t.push(Vec::new());
        t.len() - 1
    });
    let out = match node {
        Node::Feature(i) => {
            if *i >= features.cols() {
                return Err(EvalError::FeatureOutOfRange {
                    index: *i,
                    cols: features.cols(),
                });
            }
            let mut v = vec![0.0; features.rows()];
            features.copy_column_into(*i, &mut v);
            v
        }
        Node::Constant(c) => vec![*c; features.rows()],
        Node::Func(sym, children) => {
            let mut first = eval_node(&children[0], features, trace)?;
            if children.len() == 2 {
                let second = eval_node(&children[1], features, trace)?;
                apply_binary(*sym, &mut first, &second);
            } else {
                apply_unary(*sym, &mut first);
            }
            first
        }
    };
    if let (Some(t), Some(slot)) = (trace.as_mut(), slot) {
        t[slot] = out.clone();
    }
    Ok(out)
}

/// Evaluate `tree` row-wise over `features` in one bottom-up pass.
pub fn evaluate(tree: &ExprTree, features: &Matrix) -> Result<Semantics, EvalError> {
    let mut no_trace = None;
    let values = eval_node(tree.root(), features, &mut no_trace)?;
    Ok(Semantics::from_values(values))
}

/// Like [`evaluate`] but also returns every subtree's vector (preorder).
pub fn evaluate_with_trace(
    tree: &ExprTree,
    features: &Matrix,
) -> Result<(Semantics, EvalTrace), EvalError> {
    let mut node_values = Vec::with_capacity(tree.size());
    let mut trace = Some(&mut node_values);
    let values = eval_node(tree.root(), features, &mut trace)?;
    debug_assert_eq!(node_values.len(), tree.size());
    Ok((
        Semantics::from_values(values),
        EvalTrace { node_values },
    ))
}
