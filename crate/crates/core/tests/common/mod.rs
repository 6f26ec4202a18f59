//! Randomized trials shared by the property tests and the acceptance
//! harness. Each compares the interpreter against a small independent model.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decent::heap::{Env, Location, StoredObject, Value};
use decent::syntax::Constant;
use decent::tx::{ConflictKind, Selection};
use decent::{Interpreter, SandboxId};

const KEYS: [&str; 4] = ["a", "b", "c", "d"];

fn key(k: &str) -> Constant {
    Constant::str(k)
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Const(Constant::Number(n)) => Some(*n),
        _ => None,
    }
}

fn proxy_parts(it: &Interpreter, l: Location) -> Option<(Location, SandboxId)> {
    match it.store().get(l) {
        StoredObject::SandboxProxy {
            target, sandbox, ..
        } => Some((*target, *sandbox)),
        _ => None,
    }
}

/// Builds a random object graph with `A.y` aliasing `A.x.z`, wraps it into
/// a sandbox and checks that every outside object reached along any path
/// of length at most three has exactly one proxy.
pub fn identity_trial(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut it = Interpreter::new();
    let n = rng.gen_range(3..9);
    let objs: Vec<Location> = (0..n).map(|_| it.new_object(Value::NULL)).collect();
    let props = ["x", "y", "z", "w"];
    for &o in &objs {
        for p in props {
            if rng.gen_bool(0.6) {
                let v = if rng.gen_bool(0.8) {
                    Value::Loc(objs[rng.gen_range(0..n)])
                } else {
                    Value::num(rng.gen_range(0..10) as f64)
                };
                it.put(o, &key(p), v).map_err(|e| e.to_string())?;
            }
        }
    }
    let (a, x, z) = (
        objs[0],
        objs[rng.gen_range(1..n)],
        objs[rng.gen_range(0..n)],
    );
    it.put(a, &key("x"), Value::Loc(x))
        .map_err(|e| e.to_string())?;
    it.put(x, &key("z"), Value::Loc(z))
        .map_err(|e| e.to_string())?;
    it.put(a, &key("y"), Value::Loc(z))
        .map_err(|e| e.to_string())?;

    let s = it.sandbox_new(Value::Loc(a));
    for &o in &objs {
        let p1 = it
            .wrap(s, &Env::empty(), Value::Loc(o))
            .map_err(|e| e.to_string())?;
        let p2 = it
            .wrap(s, &Env::empty(), Value::Loc(o))
            .map_err(|e| e.to_string())?;
        let p3 = it
            .wrap(s, &Env::empty(), p1.clone())
            .map_err(|e| e.to_string())?;
        if !p1.same(&p2) || !p1.same(&p3) {
            return Err(format!("wrap is not idempotent on obj#{}", o.0));
        }
    }

    let root = it
        .sandbox(s)
        .global
        .clone()
        .and_then(|g| g.as_loc())
        .ok_or("global is not wrapped")?;
    let mut seen: HashMap<Location, Location> = HashMap::new();
    let mut frontier = vec![(root, a)];
    for _ in 0..3 {
        let mut next = Vec::new();
        for (proxy, target) in frontier {
            for p in props {
                let inside = it.get(proxy, &key(p)).map_err(|e| e.to_string())?;
                let Some(outside) = it
                    .store()
                    .plain(target)
                    .and_then(|o| o.dict.get(p))
                    .cloned()
                else {
                    continue;
                };
                let Value::Loc(t) = outside else { continue };
                let pl = inside.as_loc().ok_or("object read came back unwrapped")?;
                let (pt, ps) = proxy_parts(&it, pl).ok_or("object read is not a proxy")?;
                if pt != t || ps != s {
                    return Err(format!("proxy for obj#{} points at obj#{}", t.0, pt.0));
                }
                if let Some(&prev) = seen.get(&t) {
                    if prev != pl {
                        return Err(format!("obj#{} has two proxies", t.0));
                    }
                }
                seen.insert(t, pl);
                next.push((pl, t));
            }
        }
        frontier = next;
    }

    let via_x = it
        .get(root, &key("x"))
        .and_then(|v| it.get(v.as_loc().unwrap(), &key("z")));
    let via_y = it.get(root, &key("y"));
    match (via_x, via_y) {
        (Ok(l), Ok(r)) if l.same(&r) => Ok(()),
        _ => Err("g.x.z and g.y are different proxies".into()),
    }
}

enum WriteOp {
    Inside(usize, &'static str, f64),
    Outside(usize, &'static str, f64),
    Read(usize, &'static str),
}

/// Random writes through a membrane followed by rollback of everything.
/// The oracle tracks the visible value before each write on its own and
/// undoes the writes newest first.
pub fn rollback_trial(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut it = Interpreter::new();
    let k = rng.gen_range(1..5);
    let mut outside: Vec<BTreeMap<&str, f64>> = vec![BTreeMap::new(); k];
    let mut targets = Vec::new();
    for model in outside.iter_mut() {
        let o = it.new_object(Value::NULL);
        for key_name in KEYS {
            if rng.gen_bool(0.5) {
                let v = rng.gen_range(0..100) as f64;
                it.put(o, &key(key_name), Value::num(v))
                    .map_err(|e| e.to_string())?;
                model.insert(key_name, v);
            }
        }
        targets.push(o);
    }
    let s = it.sandbox_new(Value::UNDEFINED);
    let proxies: Vec<Location> = targets
        .iter()
        .map(|&t| {
            it.wrap(s, &Env::empty(), Value::Loc(t))
                .map(|v| v.as_loc().unwrap())
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;

    let ops: Vec<WriteOp> = (0..rng.gen_range(1..31))
        .map(|_| {
            let t = rng.gen_range(0..k);
            let key_name = KEYS[rng.gen_range(0..KEYS.len())];
            let v = rng.gen_range(100..200) as f64;
            match rng.gen_range(0..6) {
                0 => WriteOp::Outside(t, key_name, v),
                1 => WriteOp::Read(t, key_name),
                _ => WriteOp::Inside(t, key_name, v),
            }
        })
        .collect();

    let mut shadow: Vec<BTreeMap<&str, f64>> = vec![BTreeMap::new(); k];
    let mut history: Vec<(usize, &str, Option<f64>)> = Vec::new();
    for op in &ops {
        match *op {
            WriteOp::Inside(t, key_name, v) => {
                let visible = shadow[t]
                    .get(key_name)
                    .or(outside[t].get(key_name))
                    .copied();
                history.push((t, key_name, visible));
                shadow[t].insert(key_name, v);
                it.put(proxies[t], &key(key_name), Value::num(v))
                    .map_err(|e| e.to_string())?;
            }
            WriteOp::Outside(t, key_name, v) => {
                outside[t].insert(key_name, v);
                it.put(targets[t], &key(key_name), Value::num(v))
                    .map_err(|e| e.to_string())?;
            }
            WriteOp::Read(t, key_name) => {
                it.get(proxies[t], &key(key_name))
                    .map_err(|e| e.to_string())?;
            }
        }
    }
    for (t, key_name, old) in history.into_iter().rev() {
        match old {
            Some(v) => shadow[t].insert(key_name, v),
            None => shadow[t].remove(key_name),
        };
    }

    it.rollback(s, Selection::All).map_err(|e| e.to_string())?;
    for (i, &t) in targets.iter().enumerate() {
        let Some(sl) = it.shadow_of(s, t) else {
            continue;
        };
        let actual: BTreeMap<String, Option<f64>> = it
            .store()
            .plain(sl)
            .unwrap()
            .dict
            .iter()
            .map(|(k, v)| (k.to_string(), number(v)))
            .collect();
        let expected: BTreeMap<String, Option<f64>> = shadow[i]
            .iter()
            .map(|(k, v)| (k.to_string(), Some(*v)))
            .collect();
        if actual != expected {
            return Err(format!(
                "shadow of target {i}: {actual:?} but oracle says {expected:?}"
            ));
        }
        let outside_now: BTreeMap<String, Option<f64>> = it
            .store()
            .plain(t)
            .unwrap()
            .dict
            .iter()
            .map(|(k, v)| (k.to_string(), number(v)))
            .collect();
        let outside_model: BTreeMap<String, Option<f64>> = outside[i]
            .iter()
            .map(|(k, v)| (k.to_string(), Some(*v)))
            .collect();
        if outside_now != outside_model {
            return Err(format!("rollback touched target {i}"));
        }
    }
    Ok(())
}

/// A random effect log over a few objects and functions; the stats
/// counters must match brute-force set sizes.
pub fn stats_trial(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut it = Interpreter::new();
    let objects: Vec<Location> = (0..rng.gen_range(1..5))
        .map(|_| it.new_object(Value::NULL))
        .collect();
    let functions: Vec<Location> = (0..rng.gen_range(1..4))
        .map(|_| it.eval_source("fun (x) => x").map(|v| v.as_loc().unwrap()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let s = it.sandbox_new(Value::UNDEFINED);
    let wrap = |it: &mut Interpreter, l: Location| {
        it.wrap(s, &Env::empty(), Value::Loc(l))
            .unwrap()
            .as_loc()
            .unwrap()
    };

    let mut reads = BTreeSet::new();
    let mut writes = BTreeSet::new();
    let mut calls = BTreeSet::new();
    let mut wrapped = BTreeSet::new();
    let mut total = 0;
    for _ in 0..rng.gen_range(0..60) {
        let key_name = KEYS[rng.gen_range(0..KEYS.len())];
        match rng.gen_range(0..3) {
            0 => {
                let t = objects[rng.gen_range(0..objects.len())];
                let p = wrap(&mut it, t);
                wrapped.insert(t);
                it.get(p, &key(key_name)).map_err(|e| e.to_string())?;
                // Reads the shadow already answers are not logged.
                if writes.contains(&(t, key_name)) {
                    continue;
                }
                reads.insert((t, key_name));
            }
            1 => {
                let t = objects[rng.gen_range(0..objects.len())];
                let p = wrap(&mut it, t);
                wrapped.insert(t);
                it.put(p, &key(key_name), Value::num(1.0))
                    .map_err(|e| e.to_string())?;
                writes.insert((t, key_name));
            }
            _ => {
                let f = functions[rng.gen_range(0..functions.len())];
                let p = wrap(&mut it, f);
                wrapped.insert(f);
                it.call(&Value::Loc(p), Value::num(0.0))
                    .map_err(|e| e.to_string())?;
                calls.insert(f);
            }
        }
        total += 1;
    }
    let st = it.stats(s);
    let expected = (wrapped.len(), total, reads.len(), writes.len(), calls.len());
    let actual = (
        st.objects_wrapped,
        st.effects_total,
        st.distinct_reads,
        st.distinct_writes,
        st.distinct_calls,
    );
    if actual != expected {
        return Err(format!("stats {actual:?}, brute force {expected:?}"));
    }
    Ok(())
}

/// Two sandboxes interleave reads and writes on shared objects. The
/// conflict list must match a brute-force pairwise scan, and swapping the
/// sandboxes must swap `mine` and `theirs`.
pub fn conflict_trial(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut it = Interpreter::new();
    let objects: Vec<Location> = (0..rng.gen_range(1..4))
        .map(|_| it.new_object(Value::NULL))
        .collect();
    let sandboxes = [
        it.sandbox_new(Value::UNDEFINED),
        it.sandbox_new(Value::UNDEFINED),
    ];
    let mut proxies = HashMap::new();
    for &s in &sandboxes {
        for &o in &objects {
            let p = it
                .wrap(s, &Env::empty(), Value::Loc(o))
                .map_err(|e| e.to_string())?;
            proxies.insert((s, o), p.as_loc().unwrap());
        }
    }
    // (sandbox index, target, key, is_write), in clock order.
    let mut ops = Vec::new();
    let mut shadowed = BTreeSet::new();
    for _ in 0..rng.gen_range(0..25) {
        let who = rng.gen_range(0..2);
        let t = objects[rng.gen_range(0..objects.len())];
        let key_name = KEYS[rng.gen_range(0..2)];
        let write = rng.gen_bool(0.5);
        let p = proxies[&(sandboxes[who], t)];
        if write {
            it.put(p, &key(key_name), Value::num(1.0))
                .map_err(|e| e.to_string())?;
        } else {
            it.get(p, &key(key_name)).map_err(|e| e.to_string())?;
        }
        if write {
            shadowed.insert((who, t, key_name));
        } else if shadowed.contains(&(who, t, key_name)) {
            continue;
        }
        ops.push((who, t, key_name, write));
    }
    let mut expected = 0;
    for (i, w) in ops.iter().enumerate() {
        for x in &ops[i + 1..] {
            if w.3 && w.0 != x.0 && w.1 == x.1 && w.2 == x.2 {
                expected += 1;
            }
        }
    }
    let ab = it.conflicts_with(sandboxes[0], sandboxes[1]);
    let ba = it.conflicts_with(sandboxes[1], sandboxes[0]);
    if ab.len() != expected || ba.len() != expected {
        return Err(format!(
            "{} and {} conflicts, brute force {expected}",
            ab.len(),
            ba.len()
        ));
    }
    for (c, d) in ab.iter().zip(&ba) {
        if c.kind != d.kind || c.mine.seq != d.theirs.seq || c.theirs.seq != d.mine.seq {
            return Err(format!("asymmetric conflict: {c} vs {d}"));
        }
        let (write, access) = if c.mine.seq < c.theirs.seq {
            (&c.mine, &c.theirs)
        } else {
            (&c.theirs, &c.mine)
        };
        let kind = if access.kind() == decent::tx::EffectKind::Set {
            ConflictKind::WriteAfterWrite
        } else {
            ConflictKind::ReadAfterWrite
        };
        if write.kind() != decent::tx::EffectKind::Set || c.kind != kind {
            return Err(format!("misclassified conflict: {c}"));
        }
    }
    Ok(())
}
