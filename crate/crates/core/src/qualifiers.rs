//! Uniqueness and immutability checking for the embedded C-like sections.
//!
//! Types carry an optional uniqueness number and an immutability flag at
//! every indirection level, plus one at the pointed-to content.  Two
//! pointers may alias only when their numbers agree, so assignments must
//! preserve numbers exactly; immutability may be introduced by assignment
//! but never dropped.  Function calls do not need matching numbers — only
//! the way the numbers partition the parameters must match the call site.
//!
//! Fresh numbers (for address-of promotions and `unique_field` instances)
//! start one past the largest number written anywhere in the program and
//! are handed out in program order, so the numbering is reproducible.

use std::collections::BTreeMap;
use std::fmt;

use crate::dsl::{
    BaseTypeSyntax, Diagnostic, InstanceMarkers, MiniExpr, MiniProgram, MiniStmt, QualSyntax,
    Span, TypeSyntax,
};
use crate::symtab::Verdict;

/// Qualifier state of one level: content or a pointer star.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LevelQuals {
    pub unique: Option<u64>,
    pub immutable: bool,
}

/// Scalar base of a type, qualifier-erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErasedBase {
    Int,
    Void,
    Struct(String),
}

/// A fully analyzed type: base, content qualifiers, and one entry per
/// indirection level, outermost (the variable's own value) first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualifiedType {
    pub base: ErasedBase,
    pub content: LevelQuals,
    pub levels: Vec<LevelQuals>,
}

impl QualifiedType {
    pub fn int() -> QualifiedType {
        QualifiedType {
            base: ErasedBase::Int,
            content: LevelQuals::default(),
            levels: Vec::new(),
        }
    }

    /// Lowers the written form.  Qualifiers before the base describe the
    /// content; qualifiers after a `*` describe that pointer level.
    pub fn from_syntax(ts: &TypeSyntax) -> Result<QualifiedType, Diagnostic> {
        let base = match &ts.base {
            BaseTypeSyntax::Int => ErasedBase::Int,
            BaseTypeSyntax::Void => ErasedBase::Void,
            BaseTypeSyntax::Struct(n) => ErasedBase::Struct(n.clone()),
        };
        let content = fold_quals(&ts.base_quals, ts.span)?;
        // Written innermost-first; the analyzed form wants outermost-first.
        let mut levels = Vec::with_capacity(ts.stars.len());
        for star in ts.stars.iter().rev() {
            levels.push(fold_quals(star, ts.span)?);
        }
        Ok(QualifiedType {
            base,
            content,
            levels,
        })
    }

    /// True when only qualifiers distinguish the two types.
    pub fn erased_eq(&self, other: &QualifiedType) -> bool {
        self.base == other.base && self.levels.len() == other.levels.len()
    }

    pub fn is_scalar_int(&self) -> bool {
        self.base == ErasedBase::Int && self.levels.is_empty()
    }

    pub fn is_pointer(&self) -> bool {
        !self.levels.is_empty()
    }

    /// Qualifiers governing the value slot itself: the outermost pointer
    /// level, or the content for scalars.
    pub fn top(&self) -> &LevelQuals {
        self.levels.first().unwrap_or(&self.content)
    }

    /// The type obtained by one dereference.
    pub fn deref(&self) -> Option<QualifiedType> {
        if self.levels.is_empty() {
            return None;
        }
        Some(QualifiedType {
            base: self.base.clone(),
            content: self.content,
            levels: self.levels[1..].to_vec(),
        })
    }

    /// The type of a pointer to this value, with an unqualified new level.
    pub fn address_of(&self) -> QualifiedType {
        let mut levels = Vec::with_capacity(self.levels.len() + 1);
        levels.push(LevelQuals::default());
        levels.extend(self.levels.iter().copied());
        QualifiedType {
            base: self.base.clone(),
            content: self.content,
            levels,
        }
    }

    /// Content first, then levels innermost-to-outermost — the order the
    /// qualifiers are written in.
    fn written_order(&self) -> impl Iterator<Item = &LevelQuals> {
        std::iter::once(&self.content).chain(self.levels.iter().rev())
    }

    /// All levels in a fixed order for pairwise comparison: content, then
    /// outermost to innermost.
    fn compare_order(&self) -> impl Iterator<Item = &LevelQuals> {
        std::iter::once(&self.content).chain(self.levels.iter())
    }
}

impl fmt::Display for QualifiedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut levels = self.written_order();
        let content = levels.next().unwrap();
        let mut word = |f: &mut fmt::Formatter<'_>, s: &str| -> fmt::Result {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(s)
        };
        if let Some(u) = content.unique {
            word(f, &format!("unique<{u}>"))?;
        }
        if content.immutable {
            word(f, "immutable")?;
        }
        match &self.base {
            ErasedBase::Int => word(f, "int")?,
            ErasedBase::Void => word(f, "void")?,
            ErasedBase::Struct(n) => word(f, &format!("struct {n}"))?,
        }
        for lv in levels {
            f.write_str("*")?;
            if let Some(u) = lv.unique {
                write!(f, " unique<{u}>")?;
            }
            if lv.immutable {
                f.write_str(" immutable")?;
            }
        }
        Ok(())
    }
}

fn fold_quals(quals: &[QualSyntax], span: Span) -> Result<LevelQuals, Diagnostic> {
    let mut out = LevelQuals::default();
    for q in quals {
        match q {
            QualSyntax::Unique(n) => {
                if out.unique.is_some() {
                    return Err(Diagnostic::error(
                        "bad-qualifier",
                        "a level may carry at most one uniqueness number",
                        Some(span),
                    ));
                }
                out.unique = Some(*n);
            }
            QualSyntax::Immutable => out.immutable = true,
        }
    }
    Ok(out)
}

/// A declared function: parameter and return types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSignature {
    pub name: String,
    pub params: Vec<QualifiedType>,
    pub ret: QualifiedType,
}

/// Parameter indices grouped by identical full type.  Canonical form:
/// indices ascending within groups, groups ordered by first index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterPartition {
    pub groups: Vec<Vec<usize>>,
}

/// Groups a signature's parameters: one group per distinct full type.
pub fn partition_of(sig: &FunctionSignature) -> ParameterPartition {
    partition_types(&sig.params)
}

fn partition_types(types: &[QualifiedType]) -> ParameterPartition {
    let mut groups: Vec<(QualifiedType, Vec<usize>)> = Vec::new();
    for (i, t) in types.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| g == t) {
            Some((_, idxs)) => idxs.push(i),
            None => groups.push((t.clone(), vec![i])),
        }
    }
    ParameterPartition {
        groups: groups.into_iter().map(|(_, idxs)| idxs).collect(),
    }
}

/// Outcome of an assignability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignReport {
    pub verdict: Verdict,
    /// Levels (0 = content, then outermost to innermost) where a mutable
    /// source feeds an immutable target.
    pub coerced_levels: Vec<usize>,
}

impl AssignReport {
    fn refuted(msg: String) -> AssignReport {
        AssignReport {
            verdict: Verdict::Refuted(Some(msg)),
            coerced_levels: Vec::new(),
        }
    }
}

/// Whether `source` may be stored into a location of type `target`:
/// identical erased types, identical uniqueness numbers at every level,
/// and immutability gained but never lost.
pub fn assignable(target: &QualifiedType, source: &QualifiedType) -> AssignReport {
    if !target.erased_eq(source) {
        return AssignReport::refuted(format!(
            "`{source}` and `{target}` are different types once qualifiers are erased"
        ));
    }
    let mut coerced = Vec::new();
    for (i, (t, s)) in target.compare_order().zip(source.compare_order()).enumerate() {
        if t.unique != s.unique {
            return AssignReport::refuted(format!(
                "uniqueness numbers differ between `{source}` and `{target}`: \
                 values with different numbers may not alias"
            ));
        }
        match (s.immutable, t.immutable) {
            (true, false) => {
                return AssignReport::refuted(format!(
                    "`{source}` is immutable where `{target}` is not; \
                     immutability cannot be dropped"
                ));
            }
            (false, true) => coerced.push(i),
            _ => {}
        }
    }
    AssignReport {
        verdict: Verdict::Proven,
        coerced_levels: coerced,
    }
}

/// Whether a call matches a declaration: same arity, erased types agree
/// position-wise, the arguments partition exactly like the parameters, and
/// no argument loses immutability.  Uniqueness numbers themselves are free
/// to differ.
pub fn call_consistent(
    decl: &FunctionSignature,
    args: &[QualifiedType],
) -> Result<Verdict, String> {
    if decl.params.len() != args.len() {
        return Err(format!(
            "`{}` takes {} argument(s), found {}",
            decl.name,
            decl.params.len(),
            args.len()
        ));
    }
    for (i, (p, a)) in decl.params.iter().zip(args).enumerate() {
        if !p.erased_eq(a) {
            return Ok(Verdict::Refuted(Some(format!(
                "argument {} of `{}`: `{a}` does not erase to `{p}`",
                i + 1,
                decl.name
            ))));
        }
        for (pl, al) in p.compare_order().zip(a.compare_order()) {
            if al.immutable && !pl.immutable {
                return Ok(Verdict::Refuted(Some(format!(
                    "argument {} of `{}`: immutable `{a}` passed where mutable `{p}` \
                     is expected",
                    i + 1,
                    decl.name
                ))));
            }
        }
    }
    let declared = partition_of(decl);
    let called = partition_types(args);
    if declared != called {
        return Ok(Verdict::Refuted(Some(format!(
            "`{}` groups its parameters as {}, the call groups them as {}",
            decl.name,
            render_partition(&declared),
            render_partition(&called)
        ))));
    }
    Ok(Verdict::Proven)
}

fn render_partition(p: &ParameterPartition) -> String {
    let groups = p
        .groups
        .iter()
        .map(|g| {
            let ids = g.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>();
            format!("{{{}}}", ids.join(","))
        })
        .collect::<Vec<_>>();
    groups.join(" ")
}

// ---------------------------------------------------------------------------
// Whole-program checking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct VarState {
    ty: QualifiedType,
    /// Instance-specific member types from `unique_field` markers.
    member_overrides: BTreeMap<String, QualifiedType>,
}

/// A value's type, with literals kept apart: an integer literal is a fresh
/// value with no aliases and stores into any scalar slot.
#[derive(Debug, Clone)]
enum ValueType {
    Typed(QualifiedType),
    Literal,
}

struct Checker {
    structs: BTreeMap<String, Vec<(String, QualifiedType)>>,
    fns: BTreeMap<String, FunctionSignature>,
    vars: BTreeMap<String, VarState>,
    /// Largest uniqueness number encountered so far, written or handed out.
    seen_max: Option<u64>,
    diags: Vec<Diagnostic>,
}

/// Checks one embedded section and reports every violation.
pub fn check_program(prog: &MiniProgram) -> Vec<Diagnostic> {
    let mut ck = Checker {
        structs: BTreeMap::new(),
        fns: BTreeMap::new(),
        vars: BTreeMap::new(),
        seen_max: None,
        diags: Vec::new(),
    };
    for stmt in &prog.stmts {
        ck.stmt(stmt);
    }
    ck.diags
}

impl Checker {
    fn error(&mut self, code: &str, msg: String, span: Span) {
        self.diags.push(Diagnostic::error(code, msg, Some(span)));
    }

    fn info(&mut self, code: &str, msg: String, span: Span) {
        self.diags.push(Diagnostic::info(code, msg, Some(span)));
    }

    /// One past everything seen so far.  A declaration can therefore name
    /// the number its own initializer is about to receive, because its own
    /// written numbers are folded in only after the initializer runs.
    fn next_fresh(&mut self) -> u64 {
        let n = self.seen_max.map_or(0, |m| m + 1);
        self.seen_max = Some(n);
        n
    }

    /// Folds a declaration's written numbers into the running maximum.
    fn see_type(&mut self, ts: &TypeSyntax) {
        for q in ts.base_quals.iter().chain(ts.stars.iter().flatten()) {
            if let QualSyntax::Unique(n) = q {
                self.seen_max = Some(self.seen_max.map_or(*n, |m| m.max(*n)));
            }
        }
    }

    fn lower(&mut self, ts: &TypeSyntax) -> Option<QualifiedType> {
        match QualifiedType::from_syntax(ts) {
            Ok(t) => {
                if let ErasedBase::Struct(name) = &t.base {
                    if !self.structs.contains_key(name) {
                        self.error(
                            "unknown-struct",
                            format!("`struct {name}` is not declared"),
                            ts.span,
                        );
                        return None;
                    }
                }
                Some(t)
            }
            Err(d) => {
                self.diags.push(d);
                None
            }
        }
    }

    fn stmt(&mut self, stmt: &MiniStmt) {
        match stmt {
            MiniStmt::StructDecl {
                name,
                members,
                span,
            } => self.struct_decl(name, members, *span),
            MiniStmt::FnDecl {
                ret,
                name,
                params,
                span,
            } => self.fn_decl(ret, name, params, *span),
            MiniStmt::VarDecl {
                markers,
                ty,
                name,
                init,
                span,
            } => self.var_decl(*markers, ty, name, init.as_ref(), *span),
            MiniStmt::Assign {
                target,
                value,
                span,
            } => self.assign(target, value, *span),
            MiniStmt::Call { name, args, span } => self.call(name, args, *span),
        }
    }

    fn struct_decl(&mut self, name: &str, members: &[(TypeSyntax, String)], span: Span) {
        if self.structs.contains_key(name) {
            self.error(
                "redeclared-name",
                format!("`struct {name}` is declared twice"),
                span,
            );
            return;
        }
        let mut out = Vec::new();
        for (ts, mname) in members {
            self.see_type(ts);
            if let Some(t) = self.lower(ts) {
                out.push((mname.clone(), t));
            }
        }
        self.structs.insert(name.to_string(), out);
    }

    fn fn_decl(&mut self, ret: &TypeSyntax, name: &str, params: &[(TypeSyntax, Option<String>)], span: Span) {
        if self.fns.contains_key(name) {
            self.error(
                "redeclared-name",
                format!("function `{name}` is declared twice"),
                span,
            );
            return;
        }
        self.see_type(ret);
        for (ts, _) in params {
            self.see_type(ts);
        }
        let Some(ret) = self.lower(ret) else { return };
        let mut ptypes = Vec::new();
        for (ts, _) in params {
            match self.lower(ts) {
                Some(t) => ptypes.push(t),
                None => return,
            }
        }
        self.fns.insert(
            name.to_string(),
            FunctionSignature {
                name: name.to_string(),
                params: ptypes,
                ret,
            },
        );
    }

    fn var_decl(
        &mut self,
        markers: InstanceMarkers,
        ty: &TypeSyntax,
        name: &str,
        init: Option<&MiniExpr>,
        span: Span,
    ) {
        if self.vars.contains_key(name) {
            self.error(
                "redeclared-name",
                format!("`{name}` is declared twice"),
                span,
            );
            return;
        }
        let Some(t) = self.lower(ty) else { return };
        if t.base == ErasedBase::Void && t.levels.is_empty() {
            self.error(
                "bad-type",
                format!("`{name}` cannot have type `void`"),
                span,
            );
            return;
        }
        let mut member_overrides = BTreeMap::new();
        if markers.unique_field || markers.unique_pointer_field {
            let ErasedBase::Struct(sname) = &t.base else {
                self.error(
                    "bad-marker",
                    "instance markers apply only to struct variables".to_string(),
                    span,
                );
                return;
            };
            if t.is_pointer() {
                self.error(
                    "bad-marker",
                    "instance markers apply to struct values, not pointers".to_string(),
                    span,
                );
                return;
            }
            let members = self.structs.get(sname).cloned().unwrap_or_default();
            if markers.unique_field {
                let n = self.next_fresh();
                for (mname, mty) in &members {
                    if mty.is_scalar_int() {
                        let mut t = mty.clone();
                        t.content.unique = Some(n);
                        member_overrides.insert(mname.clone(), t);
                    }
                }
            }
            if markers.unique_pointer_field {
                let n = self.next_fresh();
                for (mname, mty) in &members {
                    if mty.is_pointer() {
                        let mut t = member_overrides
                            .get(mname)
                            .cloned()
                            .unwrap_or_else(|| mty.clone());
                        t.content.unique = Some(n);
                        member_overrides.insert(mname.clone(), t);
                    }
                }
            }
        }
        self.vars.insert(
            name.to_string(),
            VarState {
                ty: t.clone(),
                member_overrides,
            },
        );
        if let Some(init) = init {
            if let Some(v) = self.value_type(init) {
                self.store(&t, v, init.span(), span);
            }
        }
        // After the initializer, so `unique<4> int* pa = &a;` can name the
        // number the promotion of `a` just produced.
        self.see_type(ty);
    }

    /// Checks one store of `value` into a slot of type `target`.
    fn store(&mut self, target: &QualifiedType, value: ValueType, vspan: Span, span: Span) {
        match value {
            ValueType::Literal => {
                if !target.is_scalar_int() {
                    self.error(
                        "assign-mismatch",
                        format!("an integer literal cannot be stored into `{target}`"),
                        span,
                    );
                }
            }
            ValueType::Typed(src) => {
                let report = assignable(target, &src);
                match report.verdict {
                    Verdict::Proven => {
                        if !report.coerced_levels.is_empty() {
                            self.info(
                                "coerce-immutable",
                                format!(
                                    "`{src}` becomes immutable `{target}` here; the \
                                     permission handover is outside this checker's scope"
                                ),
                                vspan,
                            );
                        }
                    }
                    Verdict::Refuted(msg) => self.error(
                        "assign-mismatch",
                        msg.unwrap_or_else(|| "incompatible assignment".to_string()),
                        span,
                    ),
                    Verdict::Unknown(_) => unreachable!("assignability is decidable"),
                }
            }
        }
    }

    fn assign(&mut self, target: &MiniExpr, value: &MiniExpr, span: Span) {
        let Some(tty) = self.place_type(target) else {
            return;
        };
        if tty.top().immutable {
            self.error(
                "assign-immutable",
                format!("the target of this assignment has immutable type `{tty}`"),
                target.span(),
            );
            return;
        }
        if let Some(v) = self.value_type(value) {
            self.store(&tty, v, value.span(), span);
        }
    }

    fn call(&mut self, name: &str, args: &[MiniExpr], span: Span) {
        let Some(sig) = self.fns.get(name).cloned() else {
            self.error(
                "unknown-function",
                format!("function `{name}` is not declared"),
                span,
            );
            return;
        };
        let mut arg_types = Vec::new();
        for a in args {
            match self.value_type(a) {
                Some(ValueType::Typed(t)) => arg_types.push(t),
                Some(ValueType::Literal) => arg_types.push(QualifiedType::int()),
                None => return,
            }
        }
        match call_consistent(&sig, &arg_types) {
            Ok(Verdict::Proven) => {}
            Ok(Verdict::Refuted(msg)) => self.error(
                "call-partition",
                msg.unwrap_or_else(|| "inconsistent call".to_string()),
                span,
            ),
            Ok(Verdict::Unknown(_)) => unreachable!("call consistency is decidable"),
            Err(msg) => self.error("arity-mismatch", msg, span),
        }
    }

    /// The type of a location an assignment may write to.
    fn place_type(&mut self, e: &MiniExpr) -> Option<QualifiedType> {
        match e {
            MiniExpr::Name(name, span) => match self.vars.get(name) {
                Some(v) => Some(v.ty.clone()),
                None => {
                    self.error("unknown-name", format!("`{name}` is not declared"), *span);
                    None
                }
            },
            MiniExpr::Deref(name, span) => {
                let ty = self.named_type(name, *span)?;
                match ty.deref() {
                    Some(t) => Some(t),
                    None => {
                        self.error(
                            "deref-nonpointer",
                            format!("`{name}` has type `{ty}` and cannot be dereferenced"),
                            *span,
                        );
                        None
                    }
                }
            }
            MiniExpr::Field(name, field, span) => self.field_type(name, field, *span),
            MiniExpr::Int(_, span) | MiniExpr::AddrOf(_, span) => {
                self.error(
                    "bad-target",
                    "only a variable, `*name`, or `name.field` can be assigned to".to_string(),
                    *span,
                );
                None
            }
        }
    }

    fn named_type(&mut self, name: &str, span: Span) -> Option<QualifiedType> {
        match self.vars.get(name) {
            Some(v) => Some(v.ty.clone()),
            None => {
                self.error("unknown-name", format!("`{name}` is not declared"), span);
                None
            }
        }
    }

    fn field_type(&mut self, name: &str, field: &str, span: Span) -> Option<QualifiedType> {
        let var = match self.vars.get(name) {
            Some(v) => v.clone(),
            None => {
                self.error("unknown-name", format!("`{name}` is not declared"), span);
                return None;
            }
        };
        let ErasedBase::Struct(sname) = &var.ty.base else {
            self.error(
                "field-nonstruct",
                format!("`{name}` has type `{}` and has no fields", var.ty),
                span,
            );
            return None;
        };
        if var.ty.is_pointer() {
            self.error(
                "field-nonstruct",
                format!("`{name}` is a pointer; dereference it before selecting a field"),
                span,
            );
            return None;
        }
        if let Some(t) = var.member_overrides.get(field) {
            return Some(t.clone());
        }
        let members = self.structs.get(sname).cloned().unwrap_or_default();
        match members.iter().find(|(m, _)| m == field) {
            Some((_, t)) => Some(t.clone()),
            None => {
                self.error(
                    "no-such-field",
                    format!("`struct {sname}` has no member `{field}`"),
                    span,
                );
                None
            }
        }
    }

    /// The type of a value expression.  Taking the address of a plain
    /// scalar moves it to the heap: the scalar's content receives a fresh
    /// uniqueness number, once, and keeps it from then on.
    fn value_type(&mut self, e: &MiniExpr) -> Option<ValueType> {
        match e {
            MiniExpr::Int(..) => Some(ValueType::Literal),
            MiniExpr::Name(name, span) => {
                Some(ValueType::Typed(self.named_type(name, *span)?))
            }
            MiniExpr::Deref(..) | MiniExpr::Field(..) => {
                Some(ValueType::Typed(self.place_type(e)?))
            }
            MiniExpr::AddrOf(name, span) => {
                let ty = self.named_type(name, *span)?;
                if ty.is_scalar_int() && ty.content.unique.is_none() {
                    let n = self.next_fresh();
                    let var = self.vars.get_mut(name).expect("looked up above");
                    var.ty.content.unique = Some(n);
                    self.info(
                        "heap-promotion",
                        format!(
                            "`&{name}` moves `{name}` to the heap; its content is now \
                             `unique<{n}> int`"
                        ),
                        *span,
                    );
                }
                let ty = self.named_type(name, *span)?;
                Some(ValueType::Typed(ty.address_of()))
            }
        }
    }
}
