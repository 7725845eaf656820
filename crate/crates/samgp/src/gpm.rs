//! Genotype-phenotype mapping: strip semantically ineffective code.
//!
//! Reduction rides on the vectors already cached by evaluation. Two rules,
//! applied at function nodes until fixpoint:
//!   (a) a node whose vector equals a child's vector (within tolerance) is
//!       replaced by that child, leftmost match first;
//!   (b) a node whose vector is constant across rows collapses to a single
//!       constant terminal.
//! A genotype whose output vector has any non-finite entry is its own
//! phenotype. Non-finite vectors at inner nodes merely never match either
//! rule (NaN and infinity compare unequal), so reduction proceeds around
//! them.

use crate::data::Matrix;
use crate::eval::{evaluate_with_trace, EvalError};
use crate::expr::{ExprTree, Node};

/// Default tolerance: relative with an equal absolute floor.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PhenotypeReport {
    pub phenotype: ExprTree,
    pub genotype_size: usize,
    pub phenotype_size: usize,
    pub redundancy: usize,
}

// Non-finite operands never match (inf == inf would otherwise slip through
// the relative bound).
fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    let diff = (a - b).abs();
    diff <= tol * a.abs().max(b.abs()) || diff <= tol
}

fn vectors_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| approx_eq(*x, *y, tol))
}

/// Representative value of a within-tolerance-constant vector; exact when
/// the entries are bitwise equal.
fn constant_value(v: &[f64]) -> f64 {
    if v.windows(2).all(|w| w[0] == w[1]) {
        v[0]
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn is_constant_vector(v: &[f64], tol: f64) -> bool {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    approx_eq(lo, hi, tol)
}

fn preorder_sizes(node: &Node, out: &mut Vec<usize>) -> usize {
    let slot = out.len();
    out.push(0);
    let mut size = 1;
    if let Node::Func(_, children) = node {
        for c in children {
            size += preorder_sizes(c, out);
        }
    }
    out[slot] = size;
    size
}

fn reduce_node(
    node: &Node,
    idx: usize,
    trace: &[Vec<f64>],
    sizes: &[usize],
    tol: f64,
    changed: &mut bool,
) -> Node {
    let children = match node {
        Node::Func(_, children) => children,
        terminal => return terminal.clone(),
    };
    let v = &trace[idx];

    // (a) child equivalence, leftmost match wins.
    let mut child_idx = idx + 1;
    for c in children {
        if vectors_match(v, &trace[child_idx], tol) {
            *changed = true;
            return reduce_node(c, child_idx, trace, sizes, tol, changed);
        }
        child_idx += sizes[child_idx];
    }

    // (b) constant collapse; the node is a function, so the subtree holds at
    // least one function node.
    if is_constant_vector(v, tol) {
        *changed = true;
        return Node::Constant(constant_value(v));
    }

    let Node::Func(sym, _) = node else { unreachable!() };
    let mut child_idx = idx + 1;
    let reduced = children
        .iter()
        .map(|c| {
            let r = reduce_node(c, child_idx, trace, sizes, tol, changed);
            child_idx += sizes[child_idx];
            r
        })
        .collect();
    Node::Func(*sym, reduced)
}

/// Map a genotype to its phenotype on `features` and report the sizes.
/// Trees that produce any non-finite value anywhere are returned unreduced
/// with redundancy 0.
pub fn extract_phenotype(
    tree: &ExprTree,
    features: &Matrix,
    tol: f64,
) -> Result<PhenotypeReport, EvalError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let genotype_size = tree.size();

    let mut current = tree.clone();
    let mut previous: Option<ExprTree> = None;
    loop {
        let (semantics, trace) = evaluate_with_trace(&current, features)?;
        if !semantics.valid {
            match previous {
                // An invalid genotype is its own phenotype.
                None => {
                    return Ok(PhenotypeReport {
                        phenotype: tree.clone(),
                        genotype_size,
                        phenotype_size: genotype_size,
                        redundancy: 0,
                    });
                }
                // A reduction step cannot invalidate a valid output vector
                // except through pathological re-rounding; the last valid
                // tree stands.
                Some(p) => {
                    current = p;
                    break;
                }
            }
        }
        let mut sizes = Vec::with_capacity(current.size());
        preorder_sizes(current.root(), &mut sizes);
        let mut changed = false;
        let next = ExprTree::new(reduce_node(
            current.root(),
            0,
            &trace.node_values,
            &sizes,
            tol,
            &mut changed,
        ));
        if !changed {
            break;
        }
        previous = Some(std::mem::replace(&mut current, next));
    }

    let phenotype_size = current.size();
    Ok(PhenotypeReport {
        redundancy: genotype_size - phenotype_size,
        genotype_size,
        phenotype_size,
        phenotype: current,
    })
}
