//! Tree-walking interpreter.
//!
//! [`execute`] runs `__globals__.__init__` (when present) and then
//! `__main__` on the given arguments. Every statement and expression
//! evaluation costs one step; container creation and growth consume heap
//! cells. Each execution owns all of its state.

mod builtins;
mod runtime;

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;

use crate::ast::*;
use crate::typing;
use crate::value::Value;

pub use builtins::int_arith;
pub use runtime::{ErrorKind, RuntimeError};

use builtins::Heap;
use runtime::{RecordObj, Rt, RtResult};

/// Outcome of one execution: the value returned by `__main__`, or the
/// runtime error that stopped it.
pub type ExecOutcome = Result<Value, RuntimeError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecLimits {
    pub max_steps: u64,
    pub max_heap_cells: u64,
    pub max_call_depth: usize,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits { max_steps: 10_000_000, max_heap_cells: 1_000_000, max_call_depth: 10_000 }
    }
}

impl ExecLimits {
    pub fn with_steps(max_steps: u64) -> Self {
        ExecLimits { max_steps, ..Self::default() }
    }
}

// Nested calls recurse on the native stack; executions run on a thread with
// room for `max_call_depth` frames.
const EXEC_STACK_BYTES: usize = 512 << 20;

/// Executes `p` on `args`.
pub fn execute(p: &Program, args: &[Value], limits: ExecLimits) -> ExecOutcome {
    let main = p.main().ok_or_else(|| RuntimeError::confusion(format!("program has no {MAIN}")))?;
    if main.params.len() != args.len() {
        return Err(RuntimeError::confusion(format!(
            "{MAIN} takes {} arguments, given {}",
            main.params.len(),
            args.len()
        )));
    }
    for (param, arg) in main.params.iter().zip(args) {
        if !arg.conforms(&param.ty) {
            return Err(RuntimeError::confusion(format!(
                "argument {} = {arg} does not conform to {}",
                param.name, param.ty
            )));
        }
    }
    let run = || {
        let mut interp = Interp::new(p, limits);
        interp.run(main, args)
    };
    let outcome = std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("uast-exec".into())
            .stack_size(EXEC_STACK_BYTES)
            .spawn_scoped(s, run)
            .map(|h| h.join())
    });
    let value = match outcome {
        Ok(Ok(result)) => result?,
        Ok(Err(panic)) => std::panic::resume_unwind(panic),
        // no thread available: run inline
        Err(_) => run()?,
    };
    if !value.conforms(&main.return_type) {
        return Err(RuntimeError::confusion(format!("{MAIN} returned {value}, which is not a {}", main.return_type)));
    }
    Ok(value)
}

/// Calls one library function or operator on plain values. Container
/// arguments are copied, so mutating builtins return the updated copy.
pub fn call_builtin(name: &str, args: &[Value]) -> Result<Value, RuntimeError> {
    if name == "new" || !typing::is_builtin(name) {
        return Err(RuntimeError::confusion(format!("{name} is not a callable builtin")));
    }
    if !typing::builtin_arities(name).contains(&args.len()) {
        return Err(RuntimeError::confusion(format!("{name} given {} arguments", args.len())));
    }
    let mut heap = Heap { cells: 0, max: u64::MAX };
    let rt_args = args.iter().map(Rt::from_value).collect();
    builtins::apply(name, rt_args, &mut heap)?.to_value()
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Rt),
}

struct Frame<'p> {
    vars: HashMap<&'p str, Rt>,
    this: Option<Rt>,
}

struct Interp<'p> {
    funcs: HashMap<&'p str, &'p FuncDecl>,
    records: HashMap<&'p str, &'p RecordDecl>,
    globals: Option<Rt>,
    limits: ExecLimits,
    steps: u64,
    heap: Heap,
    depth: usize,
}

impl<'p> Interp<'p> {
    fn new(p: &'p Program, limits: ExecLimits) -> Self {
        Interp {
            funcs: p.funcs.iter().map(|f| (f.name.as_str(), f)).collect(),
            records: p.records.iter().map(|r| (r.name.as_str(), r)).collect(),
            globals: None,
            limits,
            steps: 0,
            heap: Heap { cells: 0, max: limits.max_heap_cells },
            depth: 0,
        }
    }

    fn run(&mut self, main: &'p FuncDecl, args: &[Value]) -> ExecOutcome {
        if self.records.contains_key(GLOBALS_RECORD) {
            let g = self.default_value(&TypeTag::record(GLOBALS_RECORD), &mut HashSet::new())?;
            self.globals = Some(g);
            if let Some(init) = self.funcs.get(GLOBALS_INIT).copied() {
                let this = self.globals.clone();
                self.call(init, vec![], this)?;
            }
        }
        let mut rt_args = Vec::with_capacity(args.len());
        for a in args {
            self.heap.alloc(Rt::cells_of(a))?;
            rt_args.push(Rt::from_value(a));
        }
        self.call(main, rt_args, None)?.to_value()
    }

    fn tick(&mut self) -> RtResult<()> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(RuntimeError::new(ErrorKind::StepLimit, format!("exceeded {} steps", self.limits.max_steps)));
        }
        Ok(())
    }

    /// Zero value of a type; containers start empty and records get
    /// default fields. A record nested in itself stops the recursion with an
    /// empty instance.
    fn default_value(&mut self, ty: &TypeTag, building: &mut HashSet<String>) -> RtResult<Rt> {
        Ok(match ty {
            TypeTag::Void => Rt::Void,
            TypeTag::Bool => Rt::Bool(false),
            TypeTag::Char => Rt::Char('\0'),
            TypeTag::Int => Rt::Int(0),
            TypeTag::Real => Rt::Real(0.0),
            TypeTag::Array(_) | TypeTag::Set(_) | TypeTag::Map(..) => builtins::new_container(ty, &mut self.heap)?,
            TypeTag::Record(name) => {
                self.heap.alloc(1)?;
                let mut fields = BTreeMap::new();
                if building.insert(name.clone()) {
                    if let Some(decl) = self.records.get(name.as_str()).copied() {
                        for (fname, fdecl) in &decl.fields {
                            fields.insert(fname.clone(), self.default_value(&fdecl.ty, building)?);
                        }
                    }
                    building.remove(name);
                }
                builtins::new_record(name, fields)
            }
        })
    }

    fn call(&mut self, f: &'p FuncDecl, args: Vec<Rt>, this: Option<Rt>) -> RtResult<Rt> {
        if self.depth >= self.limits.max_call_depth {
            return Err(RuntimeError::new(
                ErrorKind::StackOverflow,
                format!("call depth exceeds {}", self.limits.max_call_depth),
            ));
        }
        if args.len() != f.params.len() {
            return Err(RuntimeError::confusion(format!("{} given {} arguments", f.name, args.len())));
        }
        let mut frame = Frame { vars: HashMap::new(), this };
        for (p, a) in f.params.iter().zip(args) {
            frame.vars.insert(p.name.as_str(), a);
        }
        for l in &f.locals {
            let v = self.default_value(&l.ty, &mut HashSet::new())?;
            frame.vars.insert(l.name.as_str(), v);
        }
        if f.kind == FuncKind::Ctor && frame.this.is_none() {
            frame.this = Some(self.default_value(&f.return_type, &mut HashSet::new())?);
        }
        self.depth += 1;
        let flow = self.exec_block(&f.body, &mut frame);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Break | Flow::Continue => Err(RuntimeError::confusion(format!("loop control escaped {}", f.name))),
            Flow::Normal => match (&frame.this, f.kind, &f.return_type) {
                (Some(this), FuncKind::Ctor, _) => Ok(this.clone()),
                (_, _, TypeTag::Void) => Ok(Rt::Void),
                _ => Err(RuntimeError::new(ErrorKind::NoReturn, format!("{} ended without returning", f.name))),
            },
        }
    }

    fn exec_block(&mut self, stmts: &'p [Stmt], frame: &mut Frame<'p>) -> RtResult<Flow> {
        for s in stmts {
            match self.exec(s, frame)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec(&mut self, s: &'p Stmt, frame: &mut Frame<'p>) -> RtResult<Flow> {
        self.tick()?;
        match s {
            Stmt::Expr(e) => {
                self.eval(e, frame)?;
                Ok(Flow::Normal)
            }
            Stmt::If { cond, then_body, else_body, .. } => {
                if self.eval_bool(cond, frame)? {
                    self.exec_block(then_body, frame)
                } else {
                    self.exec_block(else_body, frame)
                }
            }
            Stmt::While { cond, body, increment, .. } => {
                while self.eval_bool(cond, frame)? {
                    match self.exec_block(body, frame)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    if let Flow::Return(v) = self.exec_block(increment, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::Foreach { var, iterable, body, .. } => {
                let items: Vec<Rt> = match self.eval(iterable, frame)? {
                    Rt::Array(a) => a.borrow().clone(),
                    Rt::Set(s) => s.borrow().iter().map(Rt::from_value).collect(),
                    Rt::Map(m) => m.borrow().keys().map(Rt::from_value).collect(),
                    other => return Err(RuntimeError::confusion(format!("cannot iterate over {}", other.kind_name()))),
                };
                for item in items {
                    self.store_var(&var.name, item, frame)?;
                    match self.exec_block(body, frame)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::Break(_) => Ok(Flow::Break),
            Stmt::Continue(_) => Ok(Flow::Continue),
            Stmt::Return { expr, .. } => Ok(Flow::Return(self.eval(expr, frame)?)),
            Stmt::Noop => Ok(Flow::Normal),
        }
    }

    fn eval_bool(&mut self, e: &'p Expr, frame: &mut Frame<'p>) -> RtResult<bool> {
        match self.eval(e, frame)? {
            Rt::Bool(b) => Ok(b),
            other => Err(RuntimeError::confusion(format!("condition evaluated to {}", other.kind_name()))),
        }
    }

    fn load_var(&self, name: &str, frame: &Frame<'p>) -> RtResult<Rt> {
        if let Some(v) = frame.vars.get(name) {
            return Ok(v.clone());
        }
        if name == "this" {
            if let Some(t) = &frame.this {
                return Ok(t.clone());
            }
        }
        if let Some(Rt::Record(g)) = &self.globals {
            if let Some(v) = g.borrow().fields.get(name) {
                return Ok(v.clone());
            }
        }
        Err(RuntimeError::confusion(format!("unbound variable {name}")))
    }

    fn store_var(&mut self, name: &str, v: Rt, frame: &mut Frame<'p>) -> RtResult<()> {
        if let Some(slot) = frame.vars.get_mut(name) {
            *slot = v;
            return Ok(());
        }
        if let Some(Rt::Record(g)) = &self.globals {
            if let Some(slot) = g.borrow_mut().fields.get_mut(name) {
                *slot = v;
                return Ok(());
            }
        }
        Err(RuntimeError::confusion(format!("cannot assign to unbound variable {name}")))
    }

    fn record_of(v: Rt) -> RtResult<Rc<RefCell<RecordObj>>> {
        match v {
            Rt::Record(r) => Ok(r),
            other => Err(RuntimeError::confusion(format!("field access on {}", other.kind_name()))),
        }
    }

    /// Stores `v` into the place denoted by `lhs`.
    fn store(&mut self, lhs: &'p Expr, v: Rt, frame: &mut Frame<'p>) -> RtResult<()> {
        match lhs {
            Expr::Var { name, .. } => self.store_var(name, v, frame),
            Expr::Field { object, field, .. } => {
                let rec = Self::record_of(self.eval(object, frame)?)?;
                rec.borrow_mut().fields.insert(field.clone(), v);
                Ok(())
            }
            Expr::Invoke { func, args, .. } if func == "array_index" && args.len() == 2 => {
                let arr = self.eval(&args[0], frame)?;
                let idx = self.eval(&args[1], frame)?;
                match (arr, idx) {
                    (Rt::Array(a), Rt::Int(i)) => {
                        let mut a = a.borrow_mut();
                        let len = a.len();
                        if i < 0 || i as u64 >= len as u64 {
                            return Err(RuntimeError::new(
                                ErrorKind::IndexOutOfBounds,
                                format!("index {i} for length {len}"),
                            ));
                        }
                        a[i as usize] = v;
                        Ok(())
                    }
                    (a, i) => Err(RuntimeError::confusion(format!(
                        "array_index place on ({}, {})",
                        a.kind_name(),
                        i.kind_name()
                    ))),
                }
            }
            Expr::Invoke { func, args, .. } if func == "map_get" && args.len() == 2 => {
                let map = self.eval(&args[0], frame)?;
                let key = self.eval(&args[1], frame)?.to_value()?;
                match map {
                    Rt::Map(m) => {
                        if m.borrow_mut().insert(key, v).is_none() {
                            self.heap.alloc(1)?;
                        }
                        Ok(())
                    }
                    other => Err(RuntimeError::confusion(format!("map_get place on {}", other.kind_name()))),
                }
            }
            _ => Err(RuntimeError::confusion("assignment to a non-place expression")),
        }
    }

    fn eval(&mut self, e: &'p Expr, frame: &mut Frame<'p>) -> RtResult<Rt> {
        self.tick()?;
        match e {
            Expr::Assign { lhs, rhs, .. } => {
                let v = self.eval(rhs, frame)?;
                self.store(lhs, v.clone(), frame)?;
                Ok(v)
            }
            Expr::Var { name, .. } => self.load_var(name, frame),
            Expr::Field { object, field, .. } => {
                let rec = Self::record_of(self.eval(object, frame)?)?;
                let rec = rec.borrow();
                rec.fields
                    .get(field)
                    .cloned()
                    .ok_or_else(|| RuntimeError::confusion(format!("record {} has no field {field}", rec.name)))
            }
            Expr::Const { value, .. } => Ok(match value {
                Literal::Bool(b) => Rt::Bool(*b),
                Literal::Int(i) => Rt::Int(*i),
                Literal::Real(r) => Rt::Real(*r),
                Literal::Char(c) => Rt::Char(*c),
                Literal::Str(s) => {
                    self.heap.alloc(1 + s.chars().count() as u64)?;
                    Rt::array(s.chars().map(Rt::Char).collect())
                }
            }),
            Expr::Invoke { ty, func, args } => {
                if func == "new" && args.is_empty() {
                    return builtins::new_container(ty, &mut self.heap);
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame)?);
                }
                if let Some(f) = self.funcs.get(func.as_str()).copied() {
                    return self.call(f, vals, None);
                }
                if !typing::is_builtin(func) {
                    return Err(RuntimeError::confusion(format!("unknown function {func}")));
                }
                builtins::apply(func, vals, &mut self.heap)
            }
            Expr::Ternary { cond, then, els, .. } => {
                if self.eval_bool(cond, frame)? {
                    self.eval(then, frame)
                } else {
                    self.eval(els, frame)
                }
            }
            Expr::Cast { ty, expr } => {
                let v = self.eval(expr, frame)?;
                builtins::cast(v, ty)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::parse_program;

    fn run(src: &str, args: &[Value]) -> ExecOutcome {
        execute(&parse_program(src).unwrap(), args, ExecLimits::default())
    }

    #[test]
    fn array_push_statement_mutates_in_place() {
        let src = r#"{"types":[],"funcs":[["func","int*","__main__",[["var","int","var0"]],[["var","int*","var5"]],[
            ["assign","int*",["var","int*","var5"],["invoke","int*","new",[]]],
            ["invoke","int*","array_push",[["var","int*","var5"],["var","int","var0"]]],
            ["return","int*",["var","int*","var5"]]
        ]]]}"#;
        assert_eq!(run(src, &[Value::Int(4)]).unwrap(), Value::Array(vec![Value::Int(4)]));
    }

    #[test]
    fn step_limit_stops_infinite_loops() {
        let src = r#"{"types":[],"funcs":[["func","int","__main__",[],[],[
            ["while","void",["val","bool",true],[],[]],
            ["return","int",["val","int",0]]
        ]]]}"#;
        let p = parse_program(src).unwrap();
        let err = execute(&p, &[], ExecLimits::with_steps(1000)).unwrap_err();
        assert_eq!(err.kind, ErrorKind::StepLimit);
    }

    #[test]
    fn falling_off_the_end() {
        let src = r#"{"types":[],"funcs":[["func","int","__main__",[],[],[]]]}"#;
        assert_eq!(run(src, &[]).unwrap_err().kind, ErrorKind::NoReturn);
    }

    #[test]
    fn continue_runs_the_increment() {
        // sum of odd numbers below 10
        let src = r#"{"types":[],"funcs":[["func","int","__main__",[],[["var","int","i"],["var","int","s"]],[
            ["while","void",["invoke","bool","<",[["var","int","i"],["val","int",10]]],
                [["if","void",["invoke","bool","==",[["invoke","int","%",[["var","int","i"],["val","int",2]]],["val","int",0]]],
                    [["continue","void"]],[]],
                 ["assign","int",["var","int","s"],["invoke","int","+",[["var","int","s"],["var","int","i"]]]]],
                [["assign","int",["var","int","i"],["invoke","int","+",[["var","int","i"],["val","int",1]]]]]],
            ["return","int",["var","int","s"]]
        ]]]}"#;
        assert_eq!(run(src, &[]).unwrap(), Value::Int(25));
    }

    #[test]
    fn globals_and_ctor() {
        let src = r#"{"types":[
            ["record","__globals__",{"g":["var","int","g"]}],
            ["record","pt",{"x":["var","int","x"]}]
        ],"funcs":[
            ["func","void","__globals__.__init__",[],[],[["assign","int",["var","int","g"],["val","int",5]]]],
            ["ctor","pt#","pt.__init__",[["var","int","v"]],[],[
                ["assign","int",["field","int",["var","pt#","this"],"x"],["var","int","v"]]]],
            ["func","int","__main__",[],[["var","pt#","p"]],[
                ["assign","pt#",["var","pt#","p"],["invoke","pt#","pt.__init__",[["var","int","g"]]]],
                ["return","int",["field","int",["var","pt#","p"],"x"]]
            ]]
        ]}"#;
        let p = parse_program(src).unwrap();
        assert!(crate::check::validate(&p).is_empty(), "{:?}", crate::check::validate(&p));
        assert_eq!(execute(&p, &[], ExecLimits::default()).unwrap(), Value::Int(5));
    }

    #[test]
    fn foreach_over_set_is_ascending() {
        let src = r#"{"types":[],"funcs":[["func","int*","__main__",[["var","int%","s"]],[["var","int","x"],["var","int*","out"]],[
            ["foreach","void",["var","int","x"],["var","int%","s"],
                [["invoke","int*","array_push",[["var","int*","out"],["var","int","x"]]]]],
            ["return","int*",["var","int*","out"]]
        ]]]}"#;
        let set = Value::Set([3, 1, 2].into_iter().map(Value::Int).collect());
        let out = run(src, &[set]).unwrap();
        assert_eq!(out, Value::Array(vec![Value::Int(1), Value::Int(2), Value::Int(3)]));
    }

    #[test]
    fn arguments_must_conform() {
        let src = r#"{"types":[],"funcs":[["func","int","__main__",[["var","int","a"]],[],[["return","int",["var","int","a"]]]]]}"#;
        assert_eq!(run(src, &[Value::Bool(true)]).unwrap_err().kind, ErrorKind::TypeConfusion);
        assert_eq!(run(src, &[]).unwrap_err().kind, ErrorKind::TypeConfusion);
    }

    #[test]
    fn deep_recursion_hits_the_depth_limit() {
        let src = r#"{"types":[],"funcs":[
            ["func","int","f",[["var","int","n"]],[],[["return","int",["invoke","int","f",[["var","int","n"]]]]]],
            ["func","int","__main__",[],[],[["return","int",["invoke","int","f",[["val","int",1]]]]]]
        ]}"#;
        assert_eq!(run(src, &[]).unwrap_err().kind, ErrorKind::StackOverflow);
    }

    #[test]
    fn call_builtin_on_values() {
        assert_eq!(call_builtin("min", &[Value::Int(3), Value::Int(9)]).unwrap(), Value::Int(3));
        assert_eq!(call_builtin("pow", &[Value::Int(2), Value::Int(3)]).unwrap(), Value::Int(8));
        assert_eq!(
            call_builtin("string_find", &[Value::string("abcab"), Value::string("cab")]).unwrap(),
            Value::Int(2)
        );
        assert_eq!(call_builtin("pow", &[Value::Int(2), Value::Int(-1)]).unwrap_err().kind, ErrorKind::InvalidArgument);
        assert!(call_builtin("frobnicate", &[]).is_err());
        assert!(call_builtin("min", &[Value::Int(1)]).is_err());
        let pushed = call_builtin("array_push", &[Value::Array(vec![]), Value::Int(1)]).unwrap();
        assert_eq!(pushed, Value::Array(vec![Value::Int(1)]));
        let keys = call_builtin(
            "map_keys",
            &[Value::Map([(Value::Int(2), Value::Bool(true)), (Value::Int(1), Value::Bool(false))].into())],
        )
        .unwrap();
        assert_eq!(keys, Value::Array(vec![Value::Int(1), Value::Int(2)]));
        assert_eq!(
            call_builtin("sort", &[Value::Array(vec![Value::Int(3), Value::Int(-1)])]).unwrap(),
            Value::Array(vec![Value::Int(-1), Value::Int(3)])
        );
    }
}
