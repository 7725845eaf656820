//! Expression-tree genotypes: random initialization and variation operators.
//!
//! Trees are immutable after construction; every operator returns a fresh
//! tree and leaves its inputs untouched. Nodes are addressed by preorder
//! index, root = 0.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{0}` expects {1} children, found {2}")]
    WrongArity(String, usize, usize),
    #[error("`{0}` is not a terminal (features are `x<k>`, constants finite reals)")]
    BadTerminal(String),
    #[error("trailing input after expression: `{0}`")]
    TrailingInput(String),
}

/// Function-set symbols. Binary: add, sub, mul, div. The rest are unary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FuncSym {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Tanh,
    Square,
    Reciprocal,
    Sqrt,
    Exp,
    Log,
}

impl FuncSym {
    pub const ALL: [FuncSym; 12] = [
        FuncSym::Add,
        FuncSym::Sub,
        FuncSym::Mul,
        FuncSym::Div,
        FuncSym::Sin,
        FuncSym::Cos,
        FuncSym::Tanh,
        FuncSym::Square,
        FuncSym::Reciprocal,
        FuncSym::Sqrt,
        FuncSym::Exp,
        FuncSym::Log,
    ];

    pub fn arity(self) -> usize {
        match self {
            FuncSym::Add | FuncSym::Sub | FuncSym::Mul | FuncSym::Div => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FuncSym::Add => "add",
            FuncSym::Sub => "sub",
            FuncSym::Mul => "mul",
            FuncSym::Div => "div",
            FuncSym::Sin => "sin",
            FuncSym::Cos => "cos",
            FuncSym::Tanh => "tanh",
            FuncSym::Square => "square",
            FuncSym::Reciprocal => "reciprocal",
            FuncSym::Sqrt => "sqrt",
            FuncSym::Exp => "exp",
            FuncSym::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<FuncSym> {
        FuncSym::ALL.iter().copied().find(|s| s.name() == name)
    }
}

/// A tree node: a function with child subtrees, a feature reference, or a
/// constant.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Func(FuncSym, Vec<Node>),
    Feature(usize),
    Constant(f64),
}

impl Node {
    /// Node count of this subtree (fresh recount, no caching).
    pub fn size(&self) -> usize {
        match self {
            Node::Func(_, children) => 1 + children.iter().map(Node::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Edge-depth of the deepest node below (terminal = 0).
    pub fn depth(&self) -> usize {
        match self {
            Node::Func(_, children) => {
                1 + children.iter().map(Node::depth).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, Node::Func(_, _))
    }

    /// True if any node in this subtree is a function node.
    pub fn contains_function(&self) -> bool {
        matches!(self, Node::Func(_, _))
    }

    fn fmt_prefix(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Func(sym, children) => {
                write!(f, "({}", sym.name())?;
                for c in children {
                    write!(f, " ")?;
                    c.fmt_prefix(f)?;
                }
                write!(f, ")")
            }
            Node::Feature(i) => write!(f, "x{i}"),
            Node::Constant(v) => write!(f, "{v}"),
        }
    }
}

/// An expression tree with cached size and depth.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprTree {
    root: Node,
    size: usize,
    depth: usize,
}

impl ExprTree {
    pub fn new(root: Node) -> ExprTree {
        let size = root.size();
        let depth = root.depth();
        ExprTree { root, size, depth }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Subtree rooted at preorder index `index`. Panics if out of range.
    pub fn subtree(&self, index: usize) -> &Node {
        fn walk<'a>(node: &'a Node, target: usize, counter: &mut usize) -> Option<&'a Node> {
            if *counter == target {
                return Some(node);
            }
            *counter += 1;
            if let Node::Func(_, children) = node {
                for c in children {
                    if let Some(found) = walk(c, target, counter) {
                        return Some(found);
                    }
                }
            }
            None
        }
        let mut counter = 0;
        walk(&self.root, index, &mut counter).expect("subtree index out of range")
    }

    /// New tree equal to `self` with the subtree at preorder `index`
    /// replaced. Panics if out of range.
    pub fn with_replaced_subtree(&self, index: usize, replacement: Node) -> ExprTree {
        fn rebuild(
            node: &Node,
            target: usize,
            counter: &mut usize,
            replacement: &mut Option<Node>,
        ) -> Node {
            if *counter == target {
                *counter += node.size();
                return replacement.take().expect("replacement already consumed");
            }
            *counter += 1;
            match node {
                Node::Func(sym, children) => Node::Func(
                    *sym,
                    children
                        .iter()
                        .map(|c| rebuild(c, target, counter, replacement))
                        .collect(),
                ),
                other => other.clone(),
            }
        }
        assert!(index < self.size, "subtree index out of range");
        let mut counter = 0;
        let mut repl = Some(replacement);
        ExprTree::new(rebuild(&self.root, index, &mut counter, &mut repl))
    }

    /// All nodes in preorder.
    pub fn nodes(&self) -> Vec<&Node> {
        fn collect<'a>(node: &'a Node, out: &mut Vec<&'a Node>) {
            out.push(node);
            if let Node::Func(_, children) = node {
                for c in children {
                    collect(c, out);
                }
            }
        }
        let mut out = Vec::with_capacity(self.size);
        collect(&self.root, &mut out);
        out
    }

    /// Largest feature index referenced, if any.
    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes()
            .iter()
            .filter_map(|n| match n {
                Node::Feature(i) => Some(*i),
                _ => None,
            })
            .max()
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt_prefix(f)
    }
}

impl FromStr for ExprTree {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(s);
        let mut pos = 0;
        let root = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(ParseError::TrailingInput(tokens[pos..].join(" ")));
        }
        Ok(ExprTree::new(root))
    }
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut atom = String::new();
    for ch in s.chars() {
        match ch {
            '(' | ')' => {
                if !atom.is_empty() {
                    out.push(std::mem::take(&mut atom));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !atom.is_empty() {
                    out.push(std::mem::take(&mut atom));
                }
            }
            c => atom.push(c),
        }
    }
    if !atom.is_empty() {
        out.push(atom);
    }
    out
}

fn parse_node(tokens: &[String], pos: &mut usize) -> Result<Node, ParseError> {
    let tok = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
    *pos += 1;
    if tok == "(" {
        let name = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
        *pos += 1;
        let sym =
            FuncSym::from_name(name).ok_or_else(|| ParseError::UnknownFunction(name.clone()))?;
        let mut children = Vec::with_capacity(sym.arity());
        loop {
            let next = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
            if next == ")" {
                *pos += 1;
                break;
            }
            children.push(parse_node(tokens, pos)?);
        }
        if children.len() != sym.arity() {
            return Err(ParseError::WrongArity(
                name.clone(),
                sym.arity(),
                children.len(),
            ));
        }
        Ok(Node::Func(sym, children))
    } else if tok == ")" {
        Err(ParseError::UnexpectedToken(tok.clone()))
    } else {
        parse_terminal(tok)
    }
}

fn parse_terminal(tok: &str) -> Result<Node, ParseError> {
    if let Some(rest) = tok.strip_prefix('x') {
        if let Ok(i) = rest.parse::<usize>() {
            return Ok(Node::Feature(i));
        }
    }
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Node::Constant(v)),
        _ => Err(ParseError::BadTerminal(tok.to_string())),
    }
}

/// Variation parameters. Crossover and mutation are an either/or dispatch,
/// so the probabilities must sum to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationConfig {
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub init_max_depth: usize,
    pub constant_range: (f64, f64),
}

impl Default for VariationConfig {
    fn default() -> Self {
        VariationConfig {
            p_crossover: 0.8,
            p_mutation: 0.2,
            init_max_depth: 5,
            constant_range: (-1.0, 1.0),
        }
    }
}

impl VariationConfig {
    pub fn validate(&self) -> Result<(), ExprError> {
        if !(0.0..=1.0).contains(&self.p_crossover) || !(0.0..=1.0).contains(&self.p_mutation) {
            return Err(ExprError::InvalidConfig(
                "operator probabilities must lie in [0, 1]".into(),
            ));
        }
        if (self.p_crossover + self.p_mutation - 1.0).abs() > 1e-9 {
            return Err(ExprError::InvalidConfig(
                "p_crossover + p_mutation must equal 1".into(),
            ));
        }
        if self.constant_range.0 > self.constant_range.1 {
            return Err(ExprError::InvalidConfig(
                "constant range lower bound exceeds upper bound".into(),
            ));
        }
        Ok(())
    }
}

fn random_terminal<R: Rng>(n_features: usize, range: (f64, f64), rng: &mut R) -> Node {
    // n_features feature slots plus one ephemeral-constant slot, all equally
    // likely.
    let choice = rng.random_range(0..=n_features);
    if choice < n_features {
        Node::Feature(choice)
    } else {
        Node::Constant(rng.random_range(range.0..=range.1))
    }
}

fn random_function<R: Rng>(rng: &mut R) -> FuncSym {
    FuncSym::ALL[rng.random_range(0..FuncSym::ALL.len())]
}

fn grow_node<R: Rng>(
    depth_left: usize,
    n_features: usize,
    cfg: &VariationConfig,
    rng: &mut R,
) -> Node {
    let n_terminals = n_features + 1;
    let n_primitives = n_terminals + FuncSym::ALL.len();
    if depth_left == 0 || rng.random_range(0..n_primitives) < n_terminals {
        random_terminal(n_features, cfg.constant_range, rng)
    } else {
        let sym = random_function(rng);
        let children = (0..sym.arity())
            .map(|_| grow_node(depth_left - 1, n_features, cfg, rng))
            .collect();
        Node::Func(sym, children)
    }
}

fn full_node<R: Rng>(
    depth_left: usize,
    n_features: usize,
    cfg: &VariationConfig,
    rng: &mut R,
) -> Node {
    if depth_left == 0 {
        random_terminal(n_features, cfg.constant_range, rng)
    } else {
        let sym = random_function(rng);
        let children = (0..sym.arity())
            .map(|_| full_node(depth_left - 1, n_features, cfg, rng))
            .collect();
        Node::Func(sym, children)
    }
}

/// Ramped half-and-half initialization: depths cycle over
/// `2..=init_max_depth`, alternating full and grow construction per level.
pub fn rhh_init<R: Rng>(
    pop_size: usize,
    n_features: usize,
    cfg: &VariationConfig,
    rng: &mut R,
) -> Result<Vec<ExprTree>, ExprError> {
    if pop_size < 2 {
        return Err(ExprError::InvalidConfig(
            "population size must be at least 2".into(),
        ));
    }
    if n_features == 0 {
        return Err(ExprError::InvalidConfig(
            "dataset must have at least one feature".into(),
        ));
    }
    if cfg.init_max_depth < 2 {
        return Err(ExprError::InvalidConfig(
            "init_max_depth must be at least 2 for ramped init".into(),
        ));
    }
    cfg.validate()?;

    let mut schedule = Vec::new();
    for depth in 2..=cfg.init_max_depth {
        schedule.push((depth, true)); // full
        schedule.push((depth, false)); // grow
    }
    let pop = (0..pop_size)
        .map(|i| {
            let (depth, full) = schedule[i % schedule.len()];
            let root = if full {
                full_node(depth, n_features, cfg, rng)
            } else {
                grow_node(depth, n_features, cfg, rng)
            };
            ExprTree::new(root)
        })
        .collect();
    Ok(pop)
}

/// Swap crossover: copy of `a` with one uniformly chosen subtree replaced by
/// a uniformly chosen subtree of `b`. No depth cap.
pub fn swap_crossover<R: Rng>(a: &ExprTree, b: &ExprTree, rng: &mut R) -> ExprTree {
    let ia = rng.random_range(0..a.size());
    let ib = rng.random_range(0..b.size());
    a.with_replaced_subtree(ia, b.subtree(ib).clone())
}

/// Subtree mutation: copy of `a` with one uniformly chosen subtree replaced
/// by a fresh grow-method subtree of depth at most `cfg.init_max_depth`.
pub fn subtree_mutation<R: Rng>(
    a: &ExprTree,
    n_features: usize,
    cfg: &VariationConfig,
    rng: &mut R,
) -> ExprTree {
    let ia = rng.random_range(0..a.size());
    let replacement = grow_node(cfg.init_max_depth, n_features, cfg, rng);
    a.with_replaced_subtree(ia, replacement)
}

/// Copy of `a` with an independent uniform draw from `[-epsilon, epsilon]`
/// added to every constant; structure and non-constant nodes unchanged.
/// Draws happen in preorder.
pub fn perturb_constants<R: Rng>(a: &ExprTree, epsilon: f64, rng: &mut R) -> ExprTree {
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    fn walk<R: Rng>(node: &Node, epsilon: f64, rng: &mut R) -> Node {
        match node {
            Node::Constant(c) => Node::Constant(c + rng.random_range(-epsilon..=epsilon)),
            Node::Func(sym, children) => Node::Func(
                *sym,
                children.iter().map(|c| walk(c, epsilon, rng)).collect(),
            ),
            Node::Feature(i) => Node::Feature(*i),
        }
    }
    ExprTree::new(walk(&a.root, epsilon, rng))
}
