//! Partial-fraction arithmetic, Laurent expansions, Möbius pullbacks and
//! composition of first-order differential operators.

use gaudin::ratfun::{DiffOp, Mobius, Point, RationalFunction};
use gaudin::scalar::{int, rat, Rational};

type RF = RationalFunction<Rational>;

fn main() {
    // u(t) = 1/2 / t - 1 / (t - 3) + 2t
    let u = RF::simple_pole(int(0), rat(1, 2))
        .add(&RF::simple_pole(int(3), int(-1)))
        .unwrap()
        .add(&RF::polynomial(vec![int(0), int(2)]))
        .unwrap();
    println!("u        = {u}");
    println!("u'       = {}", u.derive());
    println!("u^2      = {}", u.mul(&u).unwrap());
    println!("res_3 u  = {}", u.residue(&int(3)));

    let l = u.laurent_at(&Point::Finite(int(3)), 2);
    let terms: Vec<String> = (l.lowest..=2).map(|k| format!("{}·s^{k}", l.coeff(k))).collect();
    println!("u near 3 = {}", terms.join(" + "));
    let l = u.laurent_at(&Point::Infinity, 2);
    let terms: Vec<String> = (l.lowest..=2).map(|k| format!("{}·s^{k}", l.coeff(k))).collect();
    println!("u near ∞ = {}  (s = 1/t)", terms.join(" + "));

    let pulled = u.compose_mobius(&Mobius::inversion()).unwrap();
    println!("u(1/s)   = {pulled}");

    // (∂ - u)(∂ + u) = ∂² + (u' - u²)
    let op = DiffOp::first_order(u.neg()).compose(&DiffOp::first_order(u.clone())).unwrap();
    println!("(∂-u)(∂+u): ∂^1 coefficient {}, ∂^0 coefficient {}", op.coeff(1), op.coeff(0));
}
