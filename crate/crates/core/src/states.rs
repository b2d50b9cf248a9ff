//! Student states: symbol sequences and rooted ordered labeled trees, their
//! text formats and canonicalization.
//!
//! Trees use a bracket notation, `label(child,child,...)`. Labels that contain
//! whitespace or one of `(),"\` are written in double quotes with `\"` and
//! `\\` escapes. Sequences are JSON arrays of strings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node label or sequence symbol. Never empty, never contains a newline.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label(String);

impl Label {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(Error::Data("labels must not be empty".into()));
        }
        if text.contains('\n') || text.contains('\r') {
            return Err(Error::Data(format!("label {text:?} contains a line break")));
        }
        Ok(Label(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn needs_quotes(&self) -> bool {
        self.0
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '"' | '\\'))
    }
}

impl TryFrom<String> for Label {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Label::new(s)
    }
}

impl From<Label> for String {
    fn from(l: Label) -> String {
        l.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.needs_quotes() {
            f.write_str("\"")?;
            for c in self.0.chars() {
                if c == '"' || c == '\\' {
                    f.write_str("\\")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str("\"")
        } else {
            f.write_str(&self.0)
        }
    }
}

/// Shorthand for building labels from literals in tests and examples.
///
/// Panics on an invalid label.
pub fn label(text: &str) -> Label {
    Label::new(text).expect("invalid label literal")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SequenceState {
    pub symbols: Vec<Label>,
}

impl SequenceState {
    pub fn new(symbols: Vec<Label>) -> Self {
        SequenceState { symbols }
    }

    /// One symbol per character, e.g. `"ab"` → `[a, b]`.
    pub fn from_chars(text: &str) -> Self {
        SequenceState {
            symbols: text.chars().map(|c| label(&c.to_string())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl fmt::Display for SequenceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serde_json::to_string(&self.symbols).map_err(|_| fmt::Error)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeState {
    pub label: Label,
    pub children: Vec<TreeState>,
}

impl TreeState {
    pub fn leaf(label: Label) -> Self {
        TreeState {
            label,
            children: Vec::new(),
        }
    }

    pub fn node(label: Label, children: Vec<TreeState>) -> Self {
        TreeState { label, children }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(TreeState::node_count)
            .sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(TreeState::depth)
            .max()
            .unwrap_or(0)
    }

    /// Labels in pre-order.
    pub fn preorder_labels(&self) -> Vec<&Label> {
        let mut out = Vec::new();
        fn walk<'a>(t: &'a TreeState, out: &mut Vec<&'a Label>) {
            out.push(&t.label);
            for c in &t.children {
                walk(c, out);
            }
        }
        walk(self, &mut out);
        out
    }

    /// The subtree at `path` (1-based child indices from the root).
    pub fn subtree(&self, path: &[usize]) -> Option<&TreeState> {
        let mut cur = self;
        for &i in path {
            cur = cur.children.get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }
}

impl fmt::Display for TreeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for TreeState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_tree(s)
    }
}

impl Serialize for TreeState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TreeState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_tree(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses bracket notation: `tree := label | label "(" tree ("," tree)* ")"`.
/// Whitespace between tokens is ignored.
pub fn parse_tree(text: &str) -> Result<TreeState> {
    let mut p = TreeParser {
        src: text.as_bytes(),
        text,
        pos: 0,
    };
    p.skip_ws();
    let tree = p.tree()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::parse(p.pos, "trailing input after tree"));
    }
    Ok(tree)
}

/// Inverse of [`parse_tree`].
pub fn serialize_tree(tree: &TreeState) -> String {
    tree.to_string()
}

struct TreeParser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl TreeParser<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tree(&mut self) -> Result<TreeState> {
        let label = self.label()?;
        self.skip_ws();
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                self.skip_ws();
                children.push(self.tree()?);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(_) => return Err(Error::parse(self.pos, "expected ',' or ')'")),
                    None => return Err(Error::parse(self.pos, "unterminated child list")),
                }
            }
        }
        Ok(TreeState { label, children })
    }

    fn label(&mut self) -> Result<Label> {
        let start = self.pos;
        match self.peek() {
            None => Err(Error::parse(start, "expected a label, found end of input")),
            Some(b'"') => {
                self.pos += 1;
                let mut out = String::new();
                loop {
                    let Some(c) = self.text[self.pos..].chars().next() else {
                        return Err(Error::parse(start, "unterminated quoted label"));
                    };
                    self.pos += c.len_utf8();
                    match c {
                        '"' => break,
                        '\\' => {
                            let Some(e) = self.text[self.pos..].chars().next() else {
                                return Err(Error::parse(self.pos, "dangling escape"));
                            };
                            if e != '"' && e != '\\' {
                                return Err(Error::parse(
                                    self.pos,
                                    format!("unknown escape \\{e}"),
                                ));
                            }
                            self.pos += e.len_utf8();
                            out.push(e);
                        }
                        '\n' | '\r' => {
                            return Err(Error::parse(self.pos - 1, "line break in label"))
                        }
                        c => out.push(c),
                    }
                }
                Label::new(out).map_err(|_| Error::parse(start, "empty label"))
            }
            Some(_) => {
                while let Some(c) = self.text[self.pos..].chars().next() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ',' | '"' | '\\') {
                        break;
                    }
                    self.pos += c.len_utf8();
                }
                if self.pos == start {
                    return Err(Error::parse(start, "expected a label"));
                }
                Label::new(&self.text[start..self.pos])
                    .map_err(|e| Error::parse(start, e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Sequence,
    Tree,
}

/// A student state of either kind.
///
/// On the wire a sequence is a JSON array of strings and a tree is a string in
/// bracket notation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum State {
    Sequence(SequenceState),
    Tree(TreeState),
}

impl State {
    pub fn kind(&self) -> StateKind {
        match self {
            State::Sequence(_) => StateKind::Sequence,
            State::Tree(_) => StateKind::Tree,
        }
    }

    pub fn seq(text: &str) -> State {
        State::Sequence(SequenceState::from_chars(text))
    }

    /// Parses a tree literal; panics on malformed text.
    pub fn tree(text: &str) -> State {
        State::Tree(parse_tree(text).expect("invalid tree literal"))
    }

    /// Parses state text of the given kind. Sequences accept a JSON array of
    /// strings, or a bare string that is split into one symbol per character.
    pub fn parse(kind: StateKind, text: &str) -> Result<State> {
        match kind {
            StateKind::Tree => parse_tree(text).map(State::Tree),
            StateKind::Sequence => {
                let trimmed = text.trim_start();
                if trimmed.starts_with('[') {
                    let symbols: Vec<Label> = serde_json::from_str(text)?;
                    Ok(State::Sequence(SequenceState::new(symbols)))
                } else {
                    Ok(State::Sequence(SequenceState::from_chars(text)))
                }
            }
        }
    }

    /// A text key that is equal exactly when the states are equal.
    pub fn key(&self) -> String {
        match self {
            State::Sequence(s) => format!("s:{s}"),
            State::Tree(t) => format!("t:{t}"),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            State::Sequence(s) => s.len(),
            State::Tree(t) => t.node_count(),
        }
    }

    pub fn as_sequence(&self) -> Option<&SequenceState> {
        match self {
            State::Sequence(s) => Some(s),
            State::Tree(_) => None,
        }
    }

    pub fn as_tree(&self) -> Option<&TreeState> {
        match self {
            State::Tree(t) => Some(t),
            State::Sequence(_) => None,
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Sequence(s) => s.fmt(f),
            State::Tree(t) => t.fmt(f),
        }
    }
}

/// Canonicalization rules applied to every state before distances are taken.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CanonConfig {
    /// Labels starting with one of these prefixes are variables and get
    /// renamed to `v1, v2, ...` in pre-order of first occurrence.
    pub variable_label_prefixes: Vec<Label>,
    /// Nodes with these labels have their children sorted by serialized text.
    pub commutative_labels: Vec<Label>,
    /// Subtrees rooted at these labels are removed.
    pub dead_labels: Vec<Label>,
}

fn is_canonical_variable_name(s: &str) -> bool {
    s.len() > 1 && s.starts_with('v') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

impl CanonConfig {
    pub fn is_identity(&self) -> bool {
        self.variable_label_prefixes.is_empty()
            && self.commutative_labels.is_empty()
            && self.dead_labels.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("variable_label_prefixes", &self.variable_label_prefixes),
            ("commutative_labels", &self.commutative_labels),
            ("dead_labels", &self.dead_labels),
        ];
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for (name, list) in lists {
            for l in list {
                if let Some(other) = seen.insert(l.as_str(), name) {
                    if other != name {
                        return Err(Error::Usage(format!(
                            "label {:?} appears in both {other} and {name}",
                            l.as_str()
                        )));
                    }
                }
            }
        }
        if !self.variable_label_prefixes.is_empty() {
            // Renamed variables must not be picked up again by a second pass.
            for p in &self.variable_label_prefixes {
                let p = p.as_str();
                if p == "v" || is_canonical_variable_name(p) {
                    return Err(Error::Usage(format!(
                        "variable prefix {p:?} matches canonical variable names"
                    )));
                }
            }
            for l in self.commutative_labels.iter().chain(&self.dead_labels) {
                if is_canonical_variable_name(l.as_str()) {
                    return Err(Error::Usage(format!(
                        "label {:?} collides with canonical variable names",
                        l.as_str()
                    )));
                }
            }
        }
        Ok(())
    }

    fn is_variable(&self, l: &Label) -> bool {
        self.variable_label_prefixes
            .iter()
            .any(|p| l.as_str().starts_with(p.as_str()))
    }

    fn is_dead(&self, l: &Label) -> bool {
        self.dead_labels.contains(l)
    }

    fn is_commutative(&self, l: &Label) -> bool {
        self.commutative_labels.contains(l)
    }
}

struct Renamer<'a> {
    cfg: &'a CanonConfig,
    names: BTreeMap<Label, Label>,
}

impl Renamer<'_> {
    fn rename(&mut self, l: &Label) -> Label {
        if !self.cfg.is_variable(l) {
            return l.clone();
        }
        let next = self.names.len() + 1;
        self.names
            .entry(l.clone())
            .or_insert_with(|| Label(format!("v{next}")))
            .clone()
    }
}

/// Canonicalizes a tree: drops dead subtrees (the root is kept), renames
/// variables in pre-order, then sorts the children of commutative nodes.
pub fn canonicalize_tree(tree: &TreeState, cfg: &CanonConfig) -> TreeState {
    if cfg.is_identity() {
        return tree.clone();
    }
    fn prune(t: &TreeState, cfg: &CanonConfig) -> TreeState {
        TreeState {
            label: t.label.clone(),
            children: t
                .children
                .iter()
                .filter(|c| !cfg.is_dead(&c.label))
                .map(|c| prune(c, cfg))
                .collect(),
        }
    }
    fn rename(t: &mut TreeState, r: &mut Renamer<'_>) {
        t.label = r.rename(&t.label);
        for c in &mut t.children {
            rename(c, r);
        }
    }
    fn sort(t: &mut TreeState, cfg: &CanonConfig) {
        for c in &mut t.children {
            sort(c, cfg);
        }
        if cfg.is_commutative(&t.label) {
            t.children.sort_by_cached_key(|c| c.to_string());
        }
    }
    let mut out = prune(tree, cfg);
    let mut r = Renamer {
        cfg,
        names: BTreeMap::new(),
    };
    rename(&mut out, &mut r);
    sort(&mut out, cfg);
    out
}

/// Sequence counterpart of [`canonicalize_tree`]: dead symbols are dropped and
/// variables renamed; commutativity has no meaning for flat sequences.
pub fn canonicalize_sequence(seq: &SequenceState, cfg: &CanonConfig) -> SequenceState {
    if cfg.is_identity() {
        return seq.clone();
    }
    let mut r = Renamer {
        cfg,
        names: BTreeMap::new(),
    };
    SequenceState {
        symbols: seq
            .symbols
            .iter()
            .filter(|s| !cfg.is_dead(s))
            .map(|s| r.rename(s))
            .collect(),
    }
}

pub fn canonicalize(state: &State, cfg: &CanonConfig) -> State {
    match state {
        State::Sequence(s) => State::Sequence(canonicalize_sequence(s, cfg)),
        State::Tree(t) => State::Tree(canonicalize_tree(t, cfg)),
    }
}

/// Distinct labels occurring in a state.
pub fn alphabet(state: &State) -> BTreeSet<Label> {
    match state {
        State::Sequence(s) => s.symbols.iter().cloned().collect(),
        State::Tree(t) => t.preorder_labels().into_iter().cloned().collect(),
    }
}
