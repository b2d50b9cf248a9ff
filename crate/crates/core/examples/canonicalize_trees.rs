//! Canonicalization: variable renaming, commutative sorting and dead-code
//! removal make superficially different programs identical.

use chf::states::{canonicalize, label, CanonConfig, State};

fn main() {
    let cfg = CanonConfig {
        variable_label_prefixes: vec![label("var_")],
        commutative_labels: vec![label("plus")],
        dead_labels: vec![label("comment")],
    };
    for raw in [
        "def(var_n,ret(plus(var_n,1)))",
        "def(var_k,comment(todo),ret(plus(1,var_k)))",
    ] {
        let s = State::tree(raw);
        println!("{raw:45} => {}", canonicalize(&s, &cfg));
    }
}
