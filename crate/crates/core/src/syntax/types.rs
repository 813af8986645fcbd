//! Structural membership of ground terms in declared types.
//!
//! Type variables are universal: every ground term inhabits them, except
//! ones containing the overflow element. `list(T)` is
//! available without a declaration.

use std::collections::HashMap;

use super::program::{Declarations, TypeDecl, TypeExpr};
use super::term::{Term, CONS, DEEP, NIL};

fn builtin_list() -> TypeDecl {
    let t = TypeExpr::Var("T".into());
    TypeDecl {
        name: "list".into(),
        params: vec!["T".into()],
        constructors: vec![
            (NIL.into(), vec![]),
            (CONS.into(), vec![t.clone(), TypeExpr::Con("list".into(), vec![t])]),
        ],
    }
}

impl Declarations {
    /// Declared type, falling back to the built-in list type.
    pub fn resolve_type(&self, name: &str, arity: usize) -> Option<TypeDecl> {
        self.type_decl(name, arity).cloned().or_else(|| (name == "list" && arity == 1).then(builtin_list))
    }

    /// Does every type constructor mentioned in `ty` resolve?
    pub fn type_is_known(&self, ty: &TypeExpr) -> bool {
        match ty {
            TypeExpr::Var(_) => true,
            TypeExpr::Con(n, args) => self.resolve_type(n, args.len()).is_some() && args.iter().all(|a| self.type_is_known(a)),
        }
    }

    /// Is the ground term `t` an inhabitant of `ty`? Non-ground subterms and
    /// unknown types count as ill-typed.
    pub fn has_type(&self, t: &Term, ty: &TypeExpr) -> bool {
        match ty {
            TypeExpr::Var(_) => t.is_ground() && !t.occurs_functor(DEEP),
            TypeExpr::Con(name, targs) => {
                let Some(decl) = self.resolve_type(name, targs.len()) else {
                    return false;
                };
                let Term::App(f, args) = t else {
                    return false;
                };
                let env: HashMap<&str, &TypeExpr> = decl.params.iter().map(String::as_str).zip(targs).collect();
                decl.constructors.iter().any(|(c, cargs)| {
                    c == f
                        && cargs.len() == args.len()
                        && cargs.iter().zip(args).all(|(cty, a)| self.has_type(a, &substitute(cty, &env)))
                })
            }
        }
    }
}

fn substitute(ty: &TypeExpr, env: &HashMap<&str, &TypeExpr>) -> TypeExpr {
    match ty {
        TypeExpr::Var(v) => env.get(v.as_str()).map_or_else(|| ty.clone(), |t| (*t).clone()),
        TypeExpr::Con(n, args) => TypeExpr::Con(n.clone(), args.iter().map(|a| substitute(a, env)).collect()),
    }
}
