//! Inspects the effect log of a sandbox run and lists what it changed.

use decent::heap::Value;
use decent::tx::format_effect;
use decent::Interpreter;

fn main() {
    let mut it = Interpreter::new();
    let config = it
        .eval_source("let c = new null; let _ = c.debug = false; let _ = c.level = 1; c")
        .expect("setup runs");
    let tweak = it
        .eval_source("fun (cfg) => let _ = cfg.debug = true; cfg.level + 1")
        .unwrap();

    let h = it.sandbox_new(Value::UNDEFINED);
    let result = it
        .sandbox_call(h, &tweak, config.clone())
        .expect("sandbox call");
    println!(
        "sandbox returned {}",
        decent::render::render(it.store(), &result, 0)
    );

    println!("all effects on the config object:");
    for e in it.effects_of(h, &config) {
        println!("  {}", format_effect(&e, true));
    }
    println!("writes only:");
    for e in it.write_effects_of(h, &config) {
        println!("  {e}");
    }
    for c in it.changes_of(h, None) {
        let inside = decent::render::render(it.store(), &c.shadow_value, 0);
        let outside = decent::render::render(it.store(), &c.outside_value, 0);
        println!("change {}: {inside} inside, {outside} outside", c.prop);
    }
    let s = it.stats(h);
    println!(
        "stats: {} effects, {} distinct reads, {} distinct writes",
        s.effects_total, s.distinct_reads, s.distinct_writes
    );
}
