// Random class hierarchies rendered as C++ source.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Method {
    pub name: &'static str,
    pub params: &'static str,
    pub is_virtual: bool,
}

#[derive(Debug, Clone)]
pub struct Class {
    pub name: String,
    /// (base index, virtual)
    pub bases: Vec<(usize, bool)>,
    pub methods: Vec<Method>,
    pub dtor: Option<bool>,
    pub data: Vec<(String, &'static str)>,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub classes: Vec<Class>,
}

pub struct Shape {
    pub classes: usize,
    pub min_bases: usize,
    pub max_bases: usize,
    /// Bases are drawn from the previous `window` classes.
    pub window: usize,
    /// Classes are partitioned into independent groups of this size.
    pub cluster: usize,
    pub p_virtual: f64,
    pub members: bool,
}

const METHODS: [(&str, &str); 3] = [("f", ""), ("g", "int"), ("h", "const char*")];

pub fn random_hierarchy(rng: &mut impl Rng, shape: &Shape) -> Hierarchy {
    let mut classes = Vec::with_capacity(shape.classes);
    for i in 0..shape.classes {
        let lo = i.saturating_sub(shape.window).max(i - i % shape.cluster);
        let mut pool: Vec<usize> = (lo..i).collect();
        pool.shuffle(rng);
        let hi = shape.max_bases.min(pool.len());
        let k = rng.gen_range(shape.min_bases.min(hi)..=hi);
        let bases = pool[..k]
            .iter()
            .map(|&b| (b, rng.gen_bool(shape.p_virtual)))
            .collect();
        let mut methods = Vec::new();
        let mut dtor = None;
        let mut data = Vec::new();
        if shape.members {
            for (name, params) in METHODS {
                if rng.gen_bool(0.4) {
                    methods.push(Method {
                        name,
                        params,
                        is_virtual: rng.gen_bool(0.3),
                    });
                }
            }
            if rng.gen_bool(0.5) {
                dtor = Some(rng.gen_bool(0.5));
            }
            if rng.gen_bool(0.3) {
                let access = *["public", "protected", "private"].choose(rng).unwrap();
                data.push((format!("m{i}"), access));
            }
        }
        classes.push(Class {
            name: format!("C{i}"),
            bases,
            methods,
            dtor,
            data,
        });
    }
    Hierarchy { classes }
}

impl Hierarchy {
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            write!(out, "class {}", c.name).unwrap();
            for (i, (b, v)) in c.bases.iter().enumerate() {
                out.push_str(if i == 0 { " : " } else { ", " });
                if *v {
                    out.push_str("virtual ");
                }
                write!(out, "public {}", self.classes[*b].name).unwrap();
            }
            out.push_str(" {\npublic:\n");
            for m in &c.methods {
                let v = if m.is_virtual { "virtual " } else { "" };
                writeln!(out, "  {v}void {}({});", m.name, m.params).unwrap();
            }
            if let Some(v) = c.dtor {
                let v = if v { "virtual " } else { "" };
                writeln!(out, "  {v}~{}();", c.name).unwrap();
            }
            for (name, access) in &c.data {
                writeln!(out, "{access}:\n  int {name};").unwrap();
            }
            out.push_str("};\n");
        }
        out
    }

    /// Indices of all proper ancestors of class `i`.
    pub fn ancestors(&self, i: usize) -> Vec<usize> {
        let mut seen = vec![false; self.classes.len()];
        let mut stack: Vec<usize> = self.classes[i].bases.iter().map(|b| b.0).collect();
        let mut out = Vec::new();
        while let Some(b) = stack.pop() {
            if !seen[b] {
                seen[b] = true;
                out.push(b);
                stack.extend(self.classes[b].bases.iter().map(|x| x.0));
            }
        }
        out.sort_unstable();
        out
    }
}
