//! One test per inference rule. Each builds the rule's premise, checks the
//! rule fired, and checks the resulting value and store.

use decent::eval::InferenceRule as R;
use decent::heap::{Env, Location, StoredObject, Value};
use decent::syntax::Constant;
use decent::{Config, Interpreter};

fn traced() -> Interpreter {
    Interpreter::with_config(Config {
        trace: true,
        ..Config::default()
    })
}

fn run(src: &str) -> (Interpreter, Value, Vec<R>) {
    let mut it = traced();
    let v = it.eval_source(src).unwrap_or_else(|e| panic!("{src}: {e}"));
    let trace = it.take_trace();
    (it, v, trace)
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Const(Constant::Number(n)) => *n,
        other => panic!("expected a number, got {other:?}"),
    }
}

fn fired(trace: &[R], rule: R) {
    assert!(
        trace.contains(&rule),
        "{} did not fire; trace: {trace:?}",
        rule.name()
    );
}

fn prop(it: &Interpreter, l: Location, k: &str) -> Option<Value> {
    it.store().plain(l).and_then(|p| p.dict.get(k).cloned())
}

#[test]
fn const_returns_the_literal() {
    let (_, v, t) = run("7");
    assert_eq!(t, vec![R::Const]);
    assert_eq!(num(&v), 7.0);
}

#[test]
fn var_looks_up_the_environment() {
    let mut it = traced();
    let env = Env::empty().bind("x".into(), Value::num(4.0));
    let v = it
        .eval(
            &env,
            &std::rc::Rc::new(decent::syntax::Expr::Var("x".into())),
        )
        .unwrap();
    assert_eq!(it.take_trace(), vec![R::Var]);
    assert_eq!(num(&v), 4.0);
}

#[test]
fn op_e_evaluates_the_left_operand() {
    let (_, _, t) = run("1 + 2");
    assert_eq!(t[0], R::OpE);
    assert_eq!(t[1], R::Const);
}

#[test]
fn op_f_evaluates_the_right_operand() {
    let (_, _, t) = run("1 + 2");
    let i = t.iter().position(|r| *r == R::OpF).unwrap();
    assert_eq!(t[i + 1], R::Const);
}

#[test]
fn op_applies_the_operator() {
    let (_, v, t) = run("6 * 7");
    assert_eq!(t.last(), Some(&R::Op));
    assert_eq!(num(&v), 42.0);
}

#[test]
fn abs_allocates_a_function_object() {
    let (it, v, t) = run("fun (x) => x");
    assert_eq!(t, vec![R::Abs]);
    let l = v.as_loc().unwrap();
    assert!(it.store().plain(l).unwrap().closure.is_some());
    assert_eq!(it.store().owner(l), None);
}

#[test]
fn app_e_evaluates_the_callee() {
    let (_, _, t) = run("(fun (x) => x)(1)");
    assert_eq!(&t[..2], &[R::AppE, R::Abs]);
}

#[test]
fn app_f_evaluates_the_argument() {
    let (_, _, t) = run("(fun (x) => x)(1)");
    assert_eq!(&t[2..4], &[R::AppF, R::Const]);
}

#[test]
fn app_binds_the_parameter_and_self_name() {
    let (_, v, t) = run("(fun f(n) => n)(9)");
    fired(&t, R::App);
    assert_eq!(num(&v), 9.0);
    let (_, v, _) = run("let f = fun self(n) => self; f(0) === f");
    assert!(v.same(&Value::Const(Constant::Bool(true))));
}

#[test]
fn new_e_evaluates_the_prototype() {
    let (_, _, t) = run("new null");
    assert_eq!(&t[..2], &[R::NewE, R::Const]);
}

#[test]
fn new_allocates_with_prototype() {
    let (it, v, t) = run("let p = new null; new p");
    fired(&t, R::New);
    let l = v.as_loc().unwrap();
    let p = it.store().plain(l).unwrap();
    assert!(p.dict.is_empty());
    assert!(p.proto.as_loc().is_some());
}

#[test]
fn get_e_evaluates_the_object() {
    let (_, _, t) = run("(new null).x");
    assert_eq!(&t[..3], &[R::GetE, R::NewE, R::Const]);
}

#[test]
fn get_f_evaluates_the_key() {
    let (_, _, t) = run("(new null)[\"x\"]");
    let i = t.iter().position(|r| *r == R::GetF).unwrap();
    assert_eq!(t[i + 1], R::Const);
}

#[test]
fn get_reads_an_own_property() {
    let (_, v, t) = run("let o = new null; let _ = o.x = 5; o.x");
    assert_eq!(t.last(), Some(&R::Get));
    assert_eq!(num(&v), 5.0);
}

#[test]
fn get_proto_follows_the_prototype_chain() {
    let (_, v, t) = run("let p = new null; let _ = p.x = 3; let o = new p; o.x");
    fired(&t, R::GetProto);
    assert_eq!(num(&v), 3.0);
}

#[test]
fn get_undef_yields_undefined_at_the_end_of_the_chain() {
    let (_, v, t) = run("(new null).missing");
    assert_eq!(t.last(), Some(&R::GetUndef));
    assert!(v.same(&Value::UNDEFINED));
}

#[test]
fn put_e_evaluates_the_object() {
    let (_, _, t) = run("(new null).x = 1");
    assert_eq!(&t[..2], &[R::PutE, R::NewE]);
}

#[test]
fn put_f_evaluates_the_key() {
    let (_, _, t) = run("(new null)[\"k\"] = 1");
    let i = t.iter().position(|r| *r == R::PutF).unwrap();
    assert_eq!(t[i + 1], R::Const);
}

#[test]
fn put_g_evaluates_the_value() {
    let (_, _, t) = run("(new null).x = 1");
    let i = t.iter().position(|r| *r == R::PutG).unwrap();
    assert_eq!(&t[i + 1..], &[R::Const, R::Put]);
}

#[test]
fn put_updates_the_dictionary() {
    let (it, v, t) = run("let o = new null; let _ = o.x = 8; o");
    fired(&t, R::Put);
    assert_eq!(num(&prop(&it, v.as_loc().unwrap(), "x").unwrap()), 8.0);
}

#[test]
fn sandbox_fresh_e_and_fresh_make_a_new_sandbox() {
    let (it, v, t) = run("fresh (sbx g => g)");
    assert_eq!(t, vec![R::SandboxFreshE, R::SandboxFresh]);
    let Value::Sandbox(sc) = v else {
        panic!("expected a sandbox closure")
    };
    assert_eq!(it.sandbox_ids().count(), 1);
    assert!(sc.env.is_empty());
}

#[test]
fn sandbox_fresh_allocates_distinct_sandboxes() {
    let (it, _, _) = run("let a = fresh (sbx g => g); let b = fresh (sbx g => g); 0");
    assert_eq!(it.sandbox_ids().count(), 2);
}

#[test]
fn sandbox_abstraction_closes_over_the_current_sandbox() {
    let (_, v, t) = run("(fresh (sbx g => sbx h => h))(1)");
    fired(&t, R::SandboxAbstraction);
    assert!(matches!(v, Value::Sandbox(_)));
}

#[test]
fn sandbox_abstraction_outside_a_sandbox_is_rejected() {
    let mut it = traced();
    let e = it.eval_source("sbx h => h").unwrap_err();
    assert!(e.to_string().contains("NativeBarrier"), "{e}");
}

#[test]
fn sandbox_application_wraps_the_argument() {
    let (it, v, t) = run("let o = new null; let _ = o.v = 1; (fresh (sbx g => g))(o)");
    fired(&t, R::SandboxApplication);
    fired(&t, R::WrapNonProxyObject);
    match it.store().get(v.as_loc().unwrap()) {
        StoredObject::SandboxProxy { target, .. } => {
            assert_eq!(num(&prop(&it, *target, "v").unwrap()), 1.0);
        }
        other => panic!("expected the proxy back, got {other:?}"),
    }
}

#[test]
fn wrap_const_passes_constants_through() {
    let (_, v, t) = run("(fresh (sbx g => g + 1))(1)");
    fired(&t, R::WrapConst);
    assert_eq!(num(&v), 2.0);
}

#[test]
fn wrap_sandbox_passes_sandbox_closures_through() {
    let (_, v, t) = run("let s = fresh (sbx h => h); (fresh (sbx g => g(5)))(s)");
    fired(&t, R::WrapSandbox);
    assert_eq!(num(&v), 5.0);
}

#[test]
fn wrap_non_proxy_object_allocates_proxy_and_shadow() {
    let mut it = traced();
    let o = it.new_object(Value::NULL);
    let s = it.sandbox_new(Value::Loc(o));
    let p = it.wrap(s, &Env::empty(), Value::Loc(o)).unwrap();
    fired(&it.take_trace(), R::WrapNonProxyObject);
    let pl = p.as_loc().unwrap();
    match it.store().get(pl) {
        StoredObject::SandboxProxy {
            target,
            shadow,
            sandbox,
            ..
        } => {
            assert_eq!(*target, o);
            assert_eq!(*sandbox, s);
            assert!(it.store().plain(*shadow).unwrap().dict.is_empty());
        }
        other => panic!("expected a proxy, got {other:?}"),
    }
    assert_eq!(it.sandbox(s).proxies.get(&o), Some(&pl));
}

#[test]
fn wrap_existing_reuses_the_proxy() {
    let mut it = traced();
    let o = it.new_object(Value::NULL);
    let s = it.sandbox_new(Value::Loc(o));
    let a = it.wrap(s, &Env::empty(), Value::Loc(o)).unwrap();
    let before = it.store().len();
    let b = it.wrap(s, &Env::empty(), Value::Loc(o)).unwrap();
    fired(&it.take_trace(), R::WrapExisting);
    assert!(a.same(&b));
    assert_eq!(it.store().len(), before);
}

#[test]
fn wrap_proxy_object_leaves_own_proxies_alone() {
    let mut it = traced();
    let o = it.new_object(Value::NULL);
    let s = it.sandbox_new(Value::Loc(o));
    let p = it.wrap(s, &Env::empty(), Value::Loc(o)).unwrap();
    let q = it.wrap(s, &Env::empty(), p.clone()).unwrap();
    fired(&it.take_trace(), R::WrapProxyObject);
    assert!(p.same(&q));
}

#[test]
fn recompile_non_function_object_yields_empty_shadow() {
    let mut it = traced();
    let o = it
        .eval_source("let o = new null; let _ = o.x = 1; o")
        .unwrap()
        .as_loc()
        .unwrap();
    let s = it.sandbox_new(Value::Loc(o));
    let shadow = it.recompile(s, &Env::empty(), o).unwrap();
    fired(&it.take_trace(), R::RecompileNonFunctionObject);
    let p = it.store().plain(shadow).unwrap();
    assert!(p.dict.is_empty() && p.closure.is_none() && p.proto.same(&Value::NULL));
    assert_eq!(it.store().owner(shadow), Some(s));
}

#[test]
fn recompile_function_object_rebinds_code_to_the_sandbox() {
    let mut it = traced();
    let f = it
        .eval_source("let y = 10; fun f(x) => x + y")
        .unwrap()
        .as_loc()
        .unwrap();
    let s = it.sandbox_new(Value::UNDEFINED);
    let env = Env::empty().bind("y".into(), Value::num(1.0));
    let shadow = it.recompile(s, &env, f).unwrap();
    fired(&it.take_trace(), R::RecompileFunctionObject);
    let c = it.store().plain(shadow).unwrap().closure.clone().unwrap();
    assert_eq!(c.self_name, None);
    assert_eq!(num(c.env.lookup("y").unwrap()), 1.0);
    assert_eq!(
        num(&it.call(&Value::Loc(shadow), Value::num(2.0)).unwrap()),
        3.0
    );
}

#[test]
fn recompile_existing_reuses_the_shadow() {
    let mut it = traced();
    let f = it.eval_source("fun (x) => x").unwrap().as_loc().unwrap();
    let s = it.sandbox_new(Value::UNDEFINED);
    let a = it.recompile(s, &Env::empty(), f).unwrap();
    let b = it.recompile(s, &Env::empty(), f).unwrap();
    fired(&it.take_trace(), R::RecompileExisting);
    assert_eq!(a, b);
}

#[test]
fn recompile_proxy_object_recompiles_the_target() {
    let mut it = traced();
    let f = it.eval_source("fun (x) => x").unwrap().as_loc().unwrap();
    let t = it.sandbox_new(Value::UNDEFINED);
    let s = it.sandbox_new(Value::UNDEFINED);
    let p = it
        .wrap(t, &Env::empty(), Value::Loc(f))
        .unwrap()
        .as_loc()
        .unwrap();
    let direct = it.recompile(s, &Env::empty(), f).unwrap();
    let via_proxy = it.recompile(s, &Env::empty(), p).unwrap();
    fired(&it.take_trace(), R::RecompileProxyObject);
    assert_eq!(direct, via_proxy);
}

#[test]
fn app_sandbox_calls_the_recompiled_shadow() {
    let (_, v, t) = run("let f = fun (x) => x * 2; (fresh (sbx g => g(21)))(f)");
    fired(&t, R::AppSandbox);
    assert_eq!(num(&v), 42.0);
}

#[test]
fn get_shadow_prefers_sandbox_writes() {
    let (it, v, t) =
        run("let o = new null; let _ = o.v = 1; (fresh (sbx g => let _ = g.v = 2; g.v))(o)");
    fired(&t, R::GetShadow);
    assert_eq!(num(&v), 2.0);
    assert!(it.sandbox_ids().count() == 1);
}

#[test]
fn get_sandbox_reads_through_to_the_target() {
    let (_, v, t) = run("let o = new null; let _ = o.v = 4; (fresh (sbx g => g.v))(o)");
    fired(&t, R::GetSandbox);
    assert_eq!(num(&v), 4.0);
}

#[test]
fn get_sandbox_wraps_what_it_reads() {
    let (_, v, _) =
        run("let o = new null; let _ = o.c = new null; (fresh (sbx g => g.c === g.c))(o)");
    assert!(v.same(&Value::Const(Constant::Bool(true))));
}

#[test]
fn put_sandbox_writes_the_shadow_only() {
    let (it, v, t) =
        run("let o = new null; let _ = o.v = 0; let _ = (fresh (sbx g => g.v = 9))(o); o");
    fired(&t, R::PutSandbox);
    assert_eq!(num(&prop(&it, v.as_loc().unwrap(), "v").unwrap()), 0.0);
}

#[test]
fn every_calculus_rule_has_a_test() {
    let src = include_str!("rules.rs");
    for rule in R::CALCULUS {
        let variant = format!("R::{rule:?}");
        assert!(
            src.matches(&variant).count() >= 1,
            "no test exercises {}",
            rule.name()
        );
    }
}
