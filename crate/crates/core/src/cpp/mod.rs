//! Fact extraction from a declaration-only C++ subset.
//!
//! Accepted input is a sequence of `class`/`struct` definitions with base
//! lists and member declarations. There is no preprocessor, no templates,
//! no namespaces and no nested classes. Each class yields the base facts of
//! [`crate::facts::Schema`]; semantic relations (implicit virtual,
//! overriding) are derived later by the rule prelude.

pub mod lexer;
pub mod parser;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

pub use lexer::{tokenize, LexError, Token};
pub use parser::{parse, Access, ClassDecl, FunctionKind, Parsed, SyntaxError};

use crate::diag::Diagnostic;
use crate::facts::{EntityKind, FactBase, SourceLoc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("{file}:{}:{}: {}", .error.line, .error.col, .error.message)]
    Lex { file: String, error: LexError },
    #[error("{file}:{}:{}: expected {}, found {}", .error.line, .error.col, .error.expected, .error.found)]
    Syntax { file: String, error: SyntaxError },
    #[error("{file}:{line}:{col}: class `{name}` is defined more than once with different contents")]
    DuplicateClass {
        file: String,
        line: u32,
        col: u32,
        name: String,
    },
    #[error("{file}:{line}:{col}: base class `{base}` of `{class}` is never defined")]
    UnresolvedBase {
        file: String,
        line: u32,
        col: u32,
        class: String,
        base: String,
    },
    #[error("inheritance cycle: {}", .cycle.join(" -> "))]
    InheritanceCycle { cycle: Vec<String> },
}

impl ExtractError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        match self {
            ExtractError::Lex { file, error } => {
                Diagnostic::error(file.as_str(), error.line, error.col, error.message.as_str())
            }
            ExtractError::Syntax { file, error } => Diagnostic::error(
                file.as_str(),
                error.line,
                error.col,
                format!("expected {}, found {}", error.expected, error.found),
            ),
            ExtractError::DuplicateClass { file, line, col, name } => Diagnostic::error(
                file.as_str(),
                *line,
                *col,
                format!("class `{name}` is defined more than once with different contents"),
            ),
            ExtractError::UnresolvedBase { file, line, col, class, base } => Diagnostic::error(
                file.as_str(),
                *line,
                *col,
                format!("base class `{base}` of `{class}` is never defined"),
            ),
            ExtractError::InheritanceCycle { .. } => Diagnostic::error("-", 0, 0, self.to_string()),
        }
    }
}

/// Output of extracting one file.
#[derive(Debug, Clone)]
pub struct Extracted {
    pub facts: FactBase,
    pub warnings: Vec<Diagnostic>,
    /// Content fingerprint per class, used to accept identical redefinitions
    /// across files.
    fingerprints: BTreeMap<String, (u32, u32, Vec<String>)>,
    bases: Vec<(String, String, u32, u32)>,
}

fn fingerprint(class: &ClassDecl) -> Vec<String> {
    let mut fp = vec![format!("{}", class.is_struct)];
    for b in &class.bases {
        fp.push(format!("base {} {} {}", b.name, b.is_virtual, b.access.as_str()));
    }
    for f in &class.functions {
        fp.push(format!(
            "fn {}{} {} {} {:?} {}",
            f.name,
            f.signature(),
            f.is_virtual,
            f.is_pure,
            f.kind,
            f.access.as_str()
        ));
    }
    for d in &class.data {
        fp.push(format!("data {} {}", d.name, d.access.as_str()));
    }
    fp
}

/// Emits the base facts for parsed declarations of one file.
pub fn extract(decls: &[ClassDecl], file: &str) -> Result<Extracted, ExtractError> {
    let mut fb = FactBase::new();
    let mut fingerprints = BTreeMap::new();
    let mut bases = Vec::new();
    let loc = |line, col| SourceLoc::new(file, line, col);
    let named = "qualified names are non-empty";

    for class in decls {
        fb.intern(EntityKind::Class, &class.name, loc(class.line, class.col))
            .expect(named);
    }
    for class in decls {
        let fp = fingerprint(class);
        if let Some((_, _, prev)) = fingerprints.get(&class.name) {
            if *prev != fp {
                return Err(ExtractError::DuplicateClass {
                    file: file.to_owned(),
                    line: class.line,
                    col: class.col,
                    name: class.name.clone(),
                });
            }
            continue;
        }
        fingerprints.insert(class.name.clone(), (class.line, class.col, fp));

        let c = fb
            .intern(EntityKind::Class, &class.name, loc(class.line, class.col))
            .expect(named);
        fb.assert_fact("class", &[c]).expect("schema");

        for base in &class.bases {
            let b = fb
                .intern(EntityKind::Class, &base.name, None)
                .expect(named);
            fb.assert_fact("direct_base_of", &[b, c]).expect("schema");
            if base.is_virtual {
                fb.assert_fact("virtual_base_of", &[b, c]).expect("schema");
            }
            let acc = fb.symbol(base.access.as_str()).expect(named);
            fb.assert_fact("base_access", &[b, c, acc]).expect("schema");
            bases.push((class.name.clone(), base.name.clone(), base.line, base.col));
        }

        for func in &class.functions {
            let sig = func.signature();
            let qualified = format!("{}::{}{}", class.name, func.name, sig);
            let f = fb
                .intern(EntityKind::Function, &qualified, loc(func.line, func.col))
                .expect(named);
            let name = fb.symbol(&func.name).expect(named);
            let sig = fb.symbol(&sig).expect(named);
            fb.assert_fact("declares_member_function", &[c, f]).expect("schema");
            fb.assert_fact("function_name", &[f, name]).expect("schema");
            fb.assert_fact("signature", &[f, sig]).expect("schema");
            if func.is_virtual {
                fb.assert_fact("virtual_kw", &[f]).expect("schema");
            }
            if func.is_pure {
                fb.assert_fact("pure_virtual", &[f]).expect("schema");
            }
            match func.kind {
                FunctionKind::Constructor => fb.assert_fact("constructor", &[f]).expect("schema"),
                FunctionKind::Destructor => fb.assert_fact("destructor", &[f]).expect("schema"),
                FunctionKind::Ordinary => {}
            }
        }

        for data in &class.data {
            let qualified = format!("{}::{}", class.name, data.name);
            let m = fb
                .intern(EntityKind::DataMember, &qualified, loc(data.line, data.col))
                .expect(named);
            let acc = fb.symbol(data.access.as_str()).expect(named);
            fb.assert_fact("data_member", &[c, m]).expect("schema");
            fb.assert_fact("member_access", &[c, m, acc]).expect("schema");
        }
    }
    Ok(Extracted {
        facts: fb,
        warnings: Vec::new(),
        fingerprints,
        bases,
    })
}

/// Tokenizes, parses and extracts one source file.
pub fn extract_source(file: &str, source: &str) -> Result<Extracted, ExtractError> {
    let tokens = tokenize(source).map_err(|error| ExtractError::Lex {
        file: file.to_owned(),
        error,
    })?;
    let parsed = parse(&tokens).map_err(|error| ExtractError::Syntax {
        file: file.to_owned(),
        error,
    })?;
    let mut out = extract(&parsed.classes, file)?;
    out.warnings = parsed
        .warnings
        .into_iter()
        .map(|w| Diagnostic::warning(file, w.line, w.col, w.message))
        .collect();
    Ok(out)
}

/// A frozen project fact base plus the warnings produced while building it.
#[derive(Debug, Clone)]
pub struct Project {
    pub facts: Arc<FactBase>,
    pub warnings: Vec<Diagnostic>,
}

/// Extracts every file, merges the results and validates the inheritance
/// graph: all bases defined, no cycles.
pub fn extract_project<S: AsRef<str>>(files: &[(S, S)]) -> Result<Project, ExtractError> {
    let mut merged = FactBase::new();
    let mut warnings = Vec::new();
    let mut defined: HashMap<String, (String, Vec<String>)> = HashMap::new();
    let mut edges: Vec<(String, String, String, u32, u32)> = Vec::new();

    for (name, source) in files {
        let (name, source) = (name.as_ref(), source.as_ref());
        let ex = extract_source(name, source)?;
        for (class, (line, col, fp)) in &ex.fingerprints {
            match defined.get(class) {
                Some((_, prev)) if prev != fp => {
                    return Err(ExtractError::DuplicateClass {
                        file: name.to_owned(),
                        line: *line,
                        col: *col,
                        name: class.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    defined.insert(class.clone(), (name.to_owned(), fp.clone()));
                }
            }
        }
        for (class, base, line, col) in &ex.bases {
            edges.push((name.to_owned(), class.clone(), base.clone(), *line, *col));
        }
        merged.merge(&ex.facts);
        warnings.extend(ex.warnings);
    }

    for (file, class, base, line, col) in &edges {
        if !defined.contains_key(base) {
            return Err(ExtractError::UnresolvedBase {
                file: file.clone(),
                line: *line,
                col: *col,
                class: class.clone(),
                base: base.clone(),
            });
        }
    }

    let derives: BTreeMap<&str, BTreeSet<&str>> =
        edges.iter().fold(BTreeMap::new(), |mut m, (_, class, base, _, _)| {
            m.entry(class.as_str()).or_default().insert(base.as_str());
            m
        });
    if let Some(cycle) = find_cycle(&derives) {
        return Err(ExtractError::InheritanceCycle { cycle });
    }

    Ok(Project {
        facts: merged.freeze(),
        warnings,
    })
}

/// Finds a cycle in the derives-from graph, rotated to start at its
/// lexicographically smallest class.
fn find_cycle(derives: &BTreeMap<&str, BTreeSet<&str>>) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    for &root in derives.keys() {
        if marks.contains_key(root) {
            continue;
        }
        // iterative DFS; each frame is (node, remaining successors)
        let mut path: Vec<&str> = vec![root];
        let mut stack: Vec<std::collections::btree_set::Iter<&str>> = Vec::new();
        marks.insert(root, Mark::Active);
        let empty = BTreeSet::new();
        stack.push(derives.get(root).unwrap_or(&empty).iter());
        while let Some(it) = stack.last_mut() {
            match it.next() {
                Some(&next) => match marks.get(next) {
                    Some(Mark::Active) => {
                        let start = path.iter().position(|&n| n == next).expect("on path");
                        let mut cycle: Vec<String> =
                            path[start..].iter().map(|s| s.to_string()).collect();
                        let min = cycle
                            .iter()
                            .enumerate()
                            .min_by(|a, b| a.1.cmp(b.1))
                            .map(|(i, _)| i)
                            .unwrap_or(0);
                        cycle.rotate_left(min);
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Active);
                        path.push(next);
                        stack.push(derives.get(next).unwrap_or(&empty).iter());
                    }
                },
                None => {
                    stack.pop();
                    let done = path.pop().expect("path mirrors stack");
                    marks.insert(done, Mark::Done);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::write_fact_file;

    fn names(fb: &FactBase, pred: &str) -> BTreeSet<Vec<String>> {
        fb.relation(pred)
            .unwrap()
            .iter()
            .map(|t| t.iter().map(|&id| fb.name(id).to_owned()).collect())
            .collect()
    }

    fn set(items: &[&[&str]]) -> BTreeSet<Vec<String>> {
        items
            .iter()
            .map(|t| t.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn diamond_facts() {
        let p = extract_project(&[(
            "d.cpp",
            "class A{}; class B: A{}; class C: A{}; class D: B, C{};",
        )])
        .unwrap();
        let fb = &p.facts;
        assert_eq!(names(fb, "class").len(), 4);
        assert_eq!(
            names(fb, "direct_base_of"),
            set(&[&["A", "B"], &["A", "C"], &["B", "D"], &["C", "D"]])
        );
        assert!(names(fb, "virtual_base_of").is_empty());
        assert_eq!(names(fb, "base_access").len(), 4);
        assert!(names(fb, "base_access")
            .iter()
            .all(|t| t[2] == "private"));
    }

    #[test]
    fn virtual_base_is_also_direct() {
        let p = extract_project(&[("v.cpp", "class A{}; class B : virtual A {};")]).unwrap();
        assert_eq!(names(&p.facts, "virtual_base_of"), set(&[&["A", "B"]]));
        assert_eq!(names(&p.facts, "direct_base_of"), set(&[&["A", "B"]]));
    }

    #[test]
    fn member_function_facts() {
        let p =
            extract_project(&[("f.cpp", "class A { public: virtual int f(int); };")]).unwrap();
        let fb = &p.facts;
        assert_eq!(
            names(fb, "declares_member_function"),
            set(&[&["A", "A::f(int)"]])
        );
        assert_eq!(names(fb, "function_name"), set(&[&["A::f(int)", "f"]]));
        assert_eq!(names(fb, "signature"), set(&[&["A::f(int)", "(int)"]]));
        assert_eq!(names(fb, "virtual_kw"), set(&[&["A::f(int)"]]));
    }

    #[test]
    fn two_files_merge() {
        let p = extract_project(&[("a.cpp", "class A {};"), ("b.cpp", "class B : public A {};")])
            .unwrap();
        assert_eq!(names(&p.facts, "class").len(), 2);
        assert_eq!(names(&p.facts, "direct_base_of"), set(&[&["A", "B"]]));
        let a = p.facts.lookup(EntityKind::Class, "A").unwrap();
        assert_eq!(p.facts.entity(a).loc, SourceLoc::new("a.cpp", 1, 7));
    }

    #[test]
    fn identical_redefinition_accepted() {
        let src = "struct P { int x; };";
        let p = extract_project(&[("a.h", src), ("b.h", src)]).unwrap();
        assert_eq!(names(&p.facts, "class").len(), 1);
        assert_eq!(names(&p.facts, "data_member").len(), 1);
    }

    #[test]
    fn conflicting_redefinition_rejected() {
        let e = extract_project(&[("a.h", "struct P { int x; };"), ("b.h", "struct P { int y; };")])
            .unwrap_err();
        assert!(matches!(e, ExtractError::DuplicateClass { ref name, .. } if name == "P"));
        let e = extract_project(&[("a.h", "class P {}; class P { int y; };")]).unwrap_err();
        assert!(matches!(e, ExtractError::DuplicateClass { .. }));
    }

    #[test]
    fn unresolved_base() {
        let e = extract_project(&[("x.cpp", "class X : Y {};")]).unwrap_err();
        assert_eq!(
            e,
            ExtractError::UnresolvedBase {
                file: "x.cpp".into(),
                line: 1,
                col: 11,
                class: "X".into(),
                base: "Y".into()
            }
        );
        assert_eq!(
            e.to_diagnostic().to_string(),
            "x.cpp:1:11: error: base class `Y` of `X` is never defined"
        );
    }

    #[test]
    fn inheritance_cycle() {
        let e = extract_project(&[("c.cpp", "class A: B{}; class B: A{};")]).unwrap_err();
        assert_eq!(
            e,
            ExtractError::InheritanceCycle {
                cycle: vec!["A".into(), "B".into()]
            }
        );
        let e = extract_project(&[("c.cpp", "class S: S{};")]).unwrap_err();
        assert_eq!(e, ExtractError::InheritanceCycle { cycle: vec!["S".into()] });
    }

    #[test]
    fn errors_carry_file() {
        let e = extract_project(&[("bad.cpp", "class A { /* }")]).unwrap_err();
        assert!(e.to_string().starts_with("bad.cpp:1:11:"));
        let e = extract_project(&[("bad.cpp", "class A {")]).unwrap_err();
        assert!(matches!(e, ExtractError::Syntax { .. }));
    }

    #[test]
    fn warnings_are_located() {
        let p = extract_project(&[("w.cpp", "class A {\n  friend class B;\n};")]).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(
            p.warnings[0].to_string(),
            "w.cpp:2:3: warning: skipped unsupported `friend` member"
        );
    }

    #[test]
    fn output_is_independent_of_file_order() {
        let a = ("a.cpp", "class A {}; class C : A {};");
        let b = ("b.cpp", "class B : A { void f(); };");
        let x = extract_project(&[a, b]).unwrap();
        let y = extract_project(&[b, a]).unwrap();
        // locations of A differ only if A were declared in both; it is not
        assert_eq!(write_fact_file(&x.facts), write_fact_file(&y.facts));
    }
}
