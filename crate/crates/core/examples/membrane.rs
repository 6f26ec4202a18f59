//! A sandbox sees outside objects only through proxies. Writes land in
//! shadow objects and the outside stays as it was.

use decent::render::render;
use decent::Interpreter;

fn main() {
    let mut it = Interpreter::new();
    let src = "
        let account = new null;
        let _ = account.balance = 100;
        let _ = account.owner = new null;
        let _ = account.owner.name = 'ada';
        let steal = fresh (sbx g =>
            let _ = g.balance = 0;
            let _ = g.owner.name = 'mallory';
            g.balance);
        let inside = steal(account);
        let report = new null;
        let _ = report.inside = inside;
        let _ = report.outside = account;
        report";
    let report = it.eval_source(src).expect("program runs");
    println!("{}", render(it.store(), &report, 3));

    let same = it
        .eval_source("let o = new null; let _ = o.me = o; (fresh (sbx g => g.me === g))(o)")
        .expect("program runs");
    println!(
        "one proxy per object, so g.me === g inside: {}",
        render(it.store(), &same, 0)
    );
}
