//! Parser and canonical pretty-printer for a typed-STRIPS subset of PDDL.
//!
//! Supported: `:types` hierarchies, `:constants`, `:predicates`, actions with
//! conjunctive preconditions and effects over possibly negated atoms, and
//! problems with `:objects`, `:init` and a conjunctive `:goal` that may contain
//! negated atoms. A domain file may hold several `(define (domain ...))` forms;
//! a problem selects its domain by name.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct PddlError {
    pub line: usize,
    pub col: usize,
    pub kind: PddlErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("arity mismatch for {name}: expected {expected}, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("type mismatch: {object} is not a {expected}")]
    TypeMismatch { object: String, expected: String },
    #[error("unknown domain {0}")]
    UnknownDomain(String),
    #[error("duplicate definition of {0}")]
    Duplicate(String),
}

type Result<T> = std::result::Result<T, PddlError>;

fn err<T>(line: usize, col: usize, kind: PddlErrorKind) -> Result<T> {
    Err(PddlError { line, col, kind })
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom { text: String, line: usize, col: usize },
    List { items: Vec<Sexp>, line: usize, col: usize },
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom { line, col, .. } | Sexp::List { line, col, .. } => (*line, *col),
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            Sexp::Atom { .. } => None,
        }
    }

    fn expect_atom(&self, what: &str) -> Result<&str> {
        let (l, c) = self.pos();
        self.atom().ok_or_else(|| PddlError {
            line: l,
            col: c,
            kind: PddlErrorKind::Syntax(format!("expected {what}")),
        })
    }

    fn expect_list(&self, what: &str) -> Result<&[Sexp]> {
        let (l, c) = self.pos();
        self.list().ok_or_else(|| PddlError {
            line: l,
            col: c,
            kind: PddlErrorKind::Syntax(format!("expected {what}")),
        })
    }
}

fn tokenize_sexps(text: &str) -> Result<Vec<Sexp>> {
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = vec![(Vec::new(), 0, 0)];
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&ch) = chars.peek() {
        match ch {
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' => {
                chars.next();
                stack.push((Vec::new(), line, col));
                col += 1;
            }
            ')' => {
                chars.next();
                if stack.len() == 1 {
                    return err(line, col, PddlErrorKind::Syntax("unbalanced ')'".into()));
                }
                let (items, l, c) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(Sexp::List { items, line: l, col: c });
                col += 1;
            }
            _ => {
                let (l, c) = (line, col);
                let mut text = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_whitespace() || c2 == '(' || c2 == ')' || c2 == ';' {
                        break;
                    }
                    text.push(c2.to_ascii_lowercase());
                    chars.next();
                    col += 1;
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom { text, line: l, col: c });
            }
        }
    }
    if stack.len() != 1 {
        let (_, l, c) = stack.pop().unwrap();
        return err(l, c, PddlErrorKind::Syntax("unclosed '('".into()));
    }
    Ok(stack.pop().unwrap().0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

/// Atom over constants or `?variables`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn render(&self) -> String {
        if self.args.is_empty() {
            format!("({})", self.pred)
        } else {
            format!("({} {})", self.pred, self.args.join(" "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub positive: bool,
    pub atom: Atom,
}

impl Lit {
    pub fn render(&self) -> String {
        if self.positive {
            self.atom.render()
        } else {
            format!("(not {})", self.atom.render())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre: Vec<Lit>,
    pub eff: Vec<Lit>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent; `object` is implicit.
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Vec<Lit>,
}

/// A domain paired with one of its problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedTask {
    pub domain: Domain,
    pub problem: Problem,
}

fn parse_typed_list(items: &[Sexp], vars: bool) -> Result<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let tok = items[i].expect_atom("name")?;
        if tok == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| {
                    let (l, c) = items[i].pos();
                    PddlError { line: l, col: c, kind: PddlErrorKind::Syntax("type expected after '-'".into()) }
                })?
                .expect_atom("type name")?;
            for n in pending.drain(..) {
                out.push(TypedName { name: n, ty: ty.to_string() });
            }
            i += 2;
            continue;
        }
        if vars && !tok.starts_with('?') {
            let (l, c) = items[i].pos();
            return err(l, c, PddlErrorKind::Syntax(format!("expected variable, got {tok}")));
        }
        pending.push(tok.to_string());
        i += 1;
    }
    for n in pending {
        out.push(TypedName { name: n, ty: "object".into() });
    }
    Ok(out)
}

fn parse_atom(s: &Sexp) -> Result<Atom> {
    let items = s.expect_list("atom")?;
    if items.is_empty() {
        let (l, c) = s.pos();
        return err(l, c, PddlErrorKind::Syntax("empty atom".into()));
    }
    let pred = items[0].expect_atom("predicate name")?.to_string();
    let args = items[1..].iter().map(|a| a.expect_atom("argument").map(str::to_string)).collect::<Result<Vec<_>>>()?;
    Ok(Atom { pred, args })
}

/// Positions are kept alongside literals until validation.
type PosLit = (Lit, usize, usize);

fn parse_literal(s: &Sexp) -> Result<PosLit> {
    let (l, c) = s.pos();
    let items = s.expect_list("literal")?;
    if items.first().and_then(Sexp::atom) == Some("not") {
        if items.len() != 2 {
            return err(l, c, PddlErrorKind::Syntax("(not ...) takes one atom".into()));
        }
        let atom = parse_atom(&items[1])?;
        return Ok((Lit { positive: false, atom }, l, c));
    }
    Ok((Lit { positive: true, atom: parse_atom(s)? }, l, c))
}

fn parse_conjunction(s: &Sexp) -> Result<Vec<PosLit>> {
    let (l, c) = s.pos();
    let items = s.expect_list("condition")?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    if items[0].atom() == Some("and") {
        return items[1..].iter().map(parse_literal).collect();
    }
    if matches!(items[0].atom(), Some("or" | "imply" | "forall" | "exists" | "when")) {
        return err(l, c, PddlErrorKind::Syntax(format!("unsupported connective {}", items[0].atom().unwrap())));
    }
    Ok(vec![parse_literal(s)?])
}

fn header<'a>(form: &'a Sexp, keyword: &str) -> Result<(&'a [Sexp], String)> {
    let (l, c) = form.pos();
    let items = form.expect_list("(define ...)")?;
    if items.first().and_then(Sexp::atom) != Some("define") || items.len() < 2 {
        return err(l, c, PddlErrorKind::Syntax("expected (define ...)".into()));
    }
    let head = items[1].expect_list("definition header")?;
    if head.len() != 2 || head[0].atom() != Some(keyword) {
        let (l, c) = items[1].pos();
        return err(l, c, PddlErrorKind::Syntax(format!("expected ({keyword} <name>)")));
    }
    Ok((&items[2..], head[1].expect_atom("name")?.to_string()))
}

struct RawAction {
    schema: ActionSchema,
    pre: Vec<PosLit>,
    eff: Vec<PosLit>,
    line: usize,
    col: usize,
}

fn parse_action(items: &[Sexp], line: usize, col: usize) -> Result<RawAction> {
    let name = items.get(1).ok_or_else(|| PddlError {
        line,
        col,
        kind: PddlErrorKind::Syntax("action name expected".into()),
    })?;
    let name = name.expect_atom("action name")?.to_string();
    let mut params = Vec::new();
    let mut pre = Vec::new();
    let mut eff = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = items[i].expect_atom("action keyword")?;
        let val = items.get(i + 1).ok_or_else(|| {
            let (l, c) = items[i].pos();
            PddlError { line: l, col: c, kind: PddlErrorKind::Syntax(format!("value expected after {key}")) }
        })?;
        match key {
            ":parameters" => params = parse_typed_list(val.expect_list("parameter list")?, true)?,
            ":precondition" => pre = parse_conjunction(val)?,
            ":effect" => eff = parse_conjunction(val)?,
            other => {
                let (l, c) = items[i].pos();
                return err(l, c, PddlErrorKind::Syntax(format!("unsupported action keyword {other}")));
            }
        }
        i += 2;
    }
    let schema = ActionSchema {
        name,
        params,
        pre: pre.iter().map(|p| p.0.clone()).collect(),
        eff: eff.iter().map(|p| p.0.clone()).collect(),
    };
    Ok(RawAction { schema, pre, eff, line, col })
}

/// Type hierarchy helper shared by validation and grounding.
#[derive(Debug, Clone)]
pub struct TypeTable {
    parent: HashMap<String, String>,
}

impl TypeTable {
    pub fn new(types: &[TypedName]) -> Self {
        let mut parent = HashMap::new();
        for t in types {
            if t.name != "object" {
                parent.insert(t.name.clone(), t.ty.clone());
            }
        }
        TypeTable { parent }
    }

    pub fn known(&self, ty: &str) -> bool {
        ty == "object" || self.parent.contains_key(ty)
    }

    /// True when `ty` equals `ancestor` or descends from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        for _ in 0..=self.parent.len() {
            if cur == ancestor {
                return true;
            }
            match self.parent.get(cur) {
                Some(p) => cur = p,
                None => return ancestor == "object",
            }
        }
        false
    }
}

fn check_unique<'a>(names: impl Iterator<Item = &'a str>, line: usize, col: usize) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return err(line, col, PddlErrorKind::Duplicate(n.to_string()));
        }
    }
    Ok(())
}

fn parse_domain_form(form: &Sexp) -> Result<Domain> {
    let (body, name) = header(form, "domain")?;
    let (fl, fc) = form.pos();
    let mut dom = Domain {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut raw_actions = Vec::new();
    for section in body {
        let (l, c) = section.pos();
        let items = section.expect_list("domain section")?;
        let key = items.first().map(|k| k.expect_atom("section keyword")).transpose()?.unwrap_or("");
        match key {
            ":requirements" => {
                dom.requirements = items[1..]
                    .iter()
                    .map(|r| r.expect_atom("requirement").map(str::to_string))
                    .collect::<Result<_>>()?
            }
            ":types" => dom.types = parse_typed_list(&items[1..], false)?,
            ":constants" => dom.constants = parse_typed_list(&items[1..], false)?,
            ":predicates" => {
                for p in &items[1..] {
                    let pi = p.expect_list("predicate declaration")?;
                    let pname = pi.first().map(|x| x.expect_atom("predicate name")).transpose()?;
                    let Some(pname) = pname else {
                        let (l, c) = p.pos();
                        return err(l, c, PddlErrorKind::Syntax("empty predicate declaration".into()));
                    };
                    dom.predicates
                        .push(PredicateDecl { name: pname.to_string(), params: parse_typed_list(&pi[1..], true)? });
                }
            }
            ":action" => raw_actions.push(parse_action(items, l, c)?),
            other => return err(l, c, PddlErrorKind::Syntax(format!("unsupported domain section {other}"))),
        }
    }
    check_unique(dom.predicates.iter().map(|p| p.name.as_str()), fl, fc)?;
    check_unique(raw_actions.iter().map(|a| a.schema.name.as_str()), fl, fc)?;
    check_unique(dom.constants.iter().map(|p| p.name.as_str()), fl, fc)?;

    let types = TypeTable::new(&dom.types);
    for t in dom.types.iter().chain(dom.constants.iter()) {
        if !types.known(&t.ty) {
            return err(fl, fc, PddlErrorKind::UnknownType(t.ty.clone()));
        }
    }
    for p in &dom.predicates {
        for param in &p.params {
            if !types.known(&param.ty) {
                return err(fl, fc, PddlErrorKind::UnknownType(param.ty.clone()));
            }
        }
    }
    let preds: HashMap<&str, &PredicateDecl> = dom.predicates.iter().map(|p| (p.name.as_str(), p)).collect();
    let consts: HashMap<&str, &str> = dom.constants.iter().map(|c| (c.name.as_str(), c.ty.as_str())).collect();
    for ra in &raw_actions {
        let vars: HashMap<&str, &str> = ra.schema.params.iter().map(|p| (p.name.as_str(), p.ty.as_str())).collect();
        for p in &ra.schema.params {
            if !types.known(&p.ty) {
                return err(ra.line, ra.col, PddlErrorKind::UnknownType(p.ty.clone()));
            }
        }
        check_unique(ra.schema.params.iter().map(|p| p.name.as_str()), ra.line, ra.col)?;
        for (lit, l, c) in ra.pre.iter().chain(ra.eff.iter()) {
            check_atom(&lit.atom, *l, *c, &preds, &types, |arg| {
                if arg.starts_with('?') {
                    vars.get(arg).copied().ok_or(PddlErrorKind::UnknownVariable(arg.to_string()))
                } else {
                    consts.get(arg).copied().ok_or(PddlErrorKind::UnknownObject(arg.to_string()))
                }
            })?;
        }
    }
    dom.actions = raw_actions.into_iter().map(|r| r.schema).collect();
    Ok(dom)
}

fn check_atom<'a>(
    atom: &Atom,
    line: usize,
    col: usize,
    preds: &HashMap<&str, &PredicateDecl>,
    types: &TypeTable,
    resolve: impl Fn(&str) -> std::result::Result<&'a str, PddlErrorKind>,
) -> Result<()> {
    let Some(decl) = preds.get(atom.pred.as_str()) else {
        return err(line, col, PddlErrorKind::UnknownPredicate(atom.pred.clone()));
    };
    if decl.params.len() != atom.args.len() {
        return err(
            line,
            col,
            PddlErrorKind::Arity { name: atom.pred.clone(), expected: decl.params.len(), got: atom.args.len() },
        );
    }
    for (arg, param) in atom.args.iter().zip(decl.params.iter()) {
        let ty = resolve(arg).map_err(|kind| PddlError { line, col, kind })?;
        if !types.is_subtype(ty, &param.ty) && !types.is_subtype(&param.ty, ty) {
            return err(line, col, PddlErrorKind::TypeMismatch { object: arg.clone(), expected: param.ty.clone() });
        }
    }
    Ok(())
}

/// Parses every `(define (domain ...))` form in `text`.
pub fn parse_domains(text: &str) -> Result<Vec<Domain>> {
    let forms = tokenize_sexps(text)?;
    let doms = forms.iter().map(parse_domain_form).collect::<Result<Vec<_>>>()?;
    if doms.is_empty() {
        return err(1, 1, PddlErrorKind::Syntax("no domain definition found".into()));
    }
    Ok(doms)
}

pub fn parse_domain(text: &str) -> Result<Domain> {
    Ok(parse_domains(text)?.remove(0))
}

struct RawProblem {
    problem: Problem,
    init: Vec<(Atom, usize, usize)>,
    goal: Vec<PosLit>,
    objects_pos: (usize, usize),
}

fn parse_problem_raw(text: &str) -> Result<RawProblem> {
    let forms = tokenize_sexps(text)?;
    let Some(form) = forms.first() else {
        return err(1, 1, PddlErrorKind::Syntax("no problem definition found".into()));
    };
    if forms.len() > 1 {
        let (l, c) = forms[1].pos();
        return err(l, c, PddlErrorKind::Syntax("trailing content after problem".into()));
    }
    let (body, name) = header(form, "problem")?;
    let mut problem = Problem { name, domain: String::new(), objects: Vec::new(), init: Vec::new(), goal: Vec::new() };
    let mut init = Vec::new();
    let mut goal = Vec::new();
    let mut objects_pos = form.pos();
    for section in body {
        let (l, c) = section.pos();
        let items = section.expect_list("problem section")?;
        let key = items.first().map(|k| k.expect_atom("section keyword")).transpose()?.unwrap_or("");
        match key {
            ":domain" => {
                problem.domain = items
                    .get(1)
                    .ok_or_else(|| PddlError {
                        line: l,
                        col: c,
                        kind: PddlErrorKind::Syntax("domain name expected".into()),
                    })?
                    .expect_atom("domain name")?
                    .to_string()
            }
            ":objects" => {
                problem.objects = parse_typed_list(&items[1..], false)?;
                objects_pos = (l, c);
            }
            ":init" => {
                for a in &items[1..] {
                    let (al, ac) = a.pos();
                    init.push((parse_atom(a)?, al, ac));
                }
            }
            ":goal" => {
                let g = items.get(1).ok_or_else(|| PddlError {
                    line: l,
                    col: c,
                    kind: PddlErrorKind::Syntax("goal expected".into()),
                })?;
                goal = parse_conjunction(g)?;
            }
            other => return err(l, c, PddlErrorKind::Syntax(format!("unsupported problem section {other}"))),
        }
    }
    Ok(RawProblem { problem, init, goal, objects_pos })
}

/// Object name → type, including the domain's constants.
pub fn object_types<'a>(domain: &'a Domain, problem: &'a Problem) -> BTreeMap<&'a str, &'a str> {
    domain.constants.iter().chain(problem.objects.iter()).map(|o| (o.name.as_str(), o.ty.as_str())).collect()
}

fn validate_ground_lits(
    lits: &[PosLit],
    preds: &HashMap<&str, &PredicateDecl>,
    types: &TypeTable,
    objs: &BTreeMap<&str, &str>,
) -> Result<()> {
    for (lit, l, c) in lits {
        check_atom(&lit.atom, *l, *c, preds, types, |arg| {
            objs.get(arg).copied().ok_or(PddlErrorKind::UnknownObject(arg.to_string()))
        })?;
    }
    Ok(())
}

/// Parses a domain file (possibly holding several domains) and a problem,
/// selecting the domain the problem names.
pub fn load_task(domain_text: &str, problem_text: &str) -> Result<LiftedTask> {
    let domains = parse_domains(domain_text)?;
    let raw = parse_problem_raw(problem_text)?;
    let Some(domain) = domains.into_iter().find(|d| d.name == raw.problem.domain) else {
        return err(1, 1, PddlErrorKind::UnknownDomain(raw.problem.domain.clone()));
    };
    let types = TypeTable::new(&domain.types);
    let (ol, oc) = raw.objects_pos;
    for o in &raw.problem.objects {
        if !types.known(&o.ty) {
            return err(ol, oc, PddlErrorKind::UnknownType(o.ty.clone()));
        }
    }
    check_unique(domain.constants.iter().chain(raw.problem.objects.iter()).map(|o| o.name.as_str()), ol, oc)?;
    let preds: HashMap<&str, &PredicateDecl> = domain.predicates.iter().map(|p| (p.name.as_str(), p)).collect();
    let objs = object_types(&domain, &raw.problem);
    let init_lits: Vec<PosLit> =
        raw.init.iter().map(|(a, l, c)| (Lit { positive: true, atom: a.clone() }, *l, *c)).collect();
    validate_ground_lits(&init_lits, &preds, &types, &objs)?;
    validate_ground_lits(&raw.goal, &preds, &types, &objs)?;
    let mut problem = raw.problem;
    problem.init = raw.init.into_iter().map(|(a, _, _)| a).collect();
    problem.goal = raw.goal.into_iter().map(|(g, _, _)| g).collect();
    Ok(LiftedTask { domain, problem })
}

/// Parses a ground conjunctive condition such as `(and (p a) (not (q b)))`
/// and checks it against the task's predicates and objects.
pub fn parse_ground_condition(text: &str, task: &LiftedTask) -> Result<Vec<Lit>> {
    let forms = tokenize_sexps(text)?;
    if forms.len() != 1 {
        return err(1, 1, PddlErrorKind::Syntax("expected exactly one condition".into()));
    }
    let lits = parse_conjunction(&forms[0])?;
    let preds: HashMap<&str, &PredicateDecl> = task.domain.predicates.iter().map(|p| (p.name.as_str(), p)).collect();
    let types = TypeTable::new(&task.domain.types);
    let objs = object_types(&task.domain, &task.problem);
    validate_ground_lits(&lits, &preds, &types, &objs)?;
    Ok(lits.into_iter().map(|l| l.0).collect())
}

fn typed_list(out: &mut String, list: &[TypedName]) {
    let mut i = 0;
    while i < list.len() {
        let ty = &list[i].ty;
        let mut j = i;
        while j < list.len() && &list[j].ty == ty {
            out.push(' ');
            out.push_str(&list[j].name);
            j += 1;
        }
        let _ = write!(out, " - {ty}");
        i = j;
    }
}

fn conjunction(lits: &[Lit]) -> String {
    match lits {
        [] => "()".into(),
        [one] => one.render(),
        many => format!("(and {})", many.iter().map(Lit::render).collect::<Vec<_>>().join(" ")),
    }
}

impl Domain {
    /// Canonical textual form; parsing it yields an equal `Domain`.
    pub fn to_pddl(&self) -> String {
        let mut out = format!("(define (domain {})\n", self.name);
        if !self.requirements.is_empty() {
            let _ = writeln!(out, "  (:requirements {})", self.requirements.join(" "));
        }
        if !self.types.is_empty() {
            out.push_str("  (:types");
            typed_list(&mut out, &self.types);
            out.push_str(")\n");
        }
        if !self.constants.is_empty() {
            out.push_str("  (:constants");
            typed_list(&mut out, &self.constants);
            out.push_str(")\n");
        }
        out.push_str("  (:predicates");
        for p in &self.predicates {
            out.push_str("\n    (");
            out.push_str(&p.name);
            typed_list(&mut out, &p.params);
            out.push(')');
        }
        out.push_str(")\n");
        for a in &self.actions {
            let _ = write!(out, "  (:action {}\n    :parameters (", a.name);
            let mut params = String::new();
            typed_list(&mut params, &a.params);
            out.push_str(params.trim_start());
            let _ = write!(out, ")\n    :precondition {}\n    :effect {})\n", conjunction(&a.pre), conjunction(&a.eff));
        }
        out.push_str(")\n");
        out
    }
}

impl Problem {
    pub fn to_pddl(&self) -> String {
        let mut out = format!("(define (problem {})\n  (:domain {})\n  (:objects", self.name, self.domain);
        typed_list(&mut out, &self.objects);
        out.push_str(")\n  (:init");
        for a in &self.init {
            out.push_str("\n    ");
            out.push_str(&a.render());
        }
        let _ = write!(out, ")\n  (:goal {}))\n", conjunction(&self.goal));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI_DOMAIN: &str = "
        (define (domain mini)
          (:requirements :strips :typing)
          (:types thing)
          (:predicates (on ?x - thing) (off ?x - thing))
          (:action flip :parameters (?x - thing)
             :precondition (off ?x)
             :effect (and (on ?x) (not (off ?x)))))";

    const MINI_PROBLEM: &str = "
        (define (problem p1) (:domain mini)
          (:objects a - thing)
          (:init (off a))
          (:goal (on a)))";

    #[test]
    fn minimal_task() {
        let t = load_task(MINI_DOMAIN, MINI_PROBLEM).unwrap();
        assert_eq!(t.domain.actions.len(), 1);
        assert_eq!(t.problem.objects.len(), 1);
        assert_eq!(t.problem.goal[0].render(), "(on a)");
    }

    #[test]
    fn undeclared_object_is_rejected() {
        let bad = MINI_PROBLEM.replace("(:goal (on a))", "(:goal (on b))");
        let e = load_task(MINI_DOMAIN, &bad).unwrap_err();
        assert!(matches!(e.kind, PddlErrorKind::UnknownObject(ref o) if o == "b"), "{e}");
        assert!(e.to_string().contains("unknown object"));
    }

    #[test]
    fn arity_and_predicate_errors() {
        let bad = MINI_PROBLEM.replace("(:init (off a))", "(:init (off a a))");
        assert!(matches!(load_task(MINI_DOMAIN, &bad).unwrap_err().kind, PddlErrorKind::Arity { .. }));
        let bad = MINI_PROBLEM.replace("(:init (off a))", "(:init (gone a))");
        assert!(matches!(load_task(MINI_DOMAIN, &bad).unwrap_err().kind, PddlErrorKind::UnknownPredicate(_)));
        let bad = MINI_PROBLEM.replace("a - thing", "a - widget");
        assert!(matches!(load_task(MINI_DOMAIN, &bad).unwrap_err().kind, PddlErrorKind::UnknownType(_)));
    }

    #[test]
    fn syntax_error_reports_position() {
        let e = parse_domains("(define (domain x)\n  (:predicates (p)))\n)").unwrap_err();
        assert_eq!((e.line, e.col), (3, 1));
        let e = parse_domains("(define (domain x)\n  (:predicates (p)").unwrap_err();
        assert!(matches!(e.kind, PddlErrorKind::Syntax(_)));
    }

    #[test]
    fn problem_selects_domain_by_name() {
        let two = format!("{MINI_DOMAIN}\n{}", MINI_DOMAIN.replace("domain mini", "domain other"));
        let t = load_task(&two, MINI_PROBLEM).unwrap();
        assert_eq!(t.domain.name, "mini");
        let e = load_task(&two, &MINI_PROBLEM.replace("(:domain mini)", "(:domain nope)")).unwrap_err();
        assert!(matches!(e.kind, PddlErrorKind::UnknownDomain(_)));
    }

    #[test]
    fn pretty_print_round_trip() {
        let t = load_task(MINI_DOMAIN, MINI_PROBLEM).unwrap();
        let again = load_task(&t.domain.to_pddl(), &t.problem.to_pddl()).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn ground_condition_parsing() {
        let t = load_task(MINI_DOMAIN, MINI_PROBLEM).unwrap();
        let g = parse_ground_condition("(and (on a) (not (off a)))", &t).unwrap();
        assert_eq!(g.len(), 2);
        assert!(!g[1].positive);
        assert!(parse_ground_condition("(on z)", &t).is_err());
    }

    #[test]
    fn subtypes_are_respected() {
        let types = TypeTable::new(&[
            TypedName { name: "vehicle".into(), ty: "object".into() },
            TypedName { name: "car".into(), ty: "vehicle".into() },
        ]);
        assert!(types.is_subtype("car", "vehicle"));
        assert!(types.is_subtype("car", "object"));
        assert!(!types.is_subtype("vehicle", "car"));
    }
}
