//! Miura transformation of a Cartan connection, residues of the resulting
//! oper, regularity at Bethe roots and the Frobenius monodromy obstruction.

use gaudin::opers::{frobenius_obstruction, miura_sl2, oper_residues, regularity_check};
use gaudin::ratfun::{Point, RationalFunction};
use gaudin::scalar::{int, rat, Rational};

type RF = RationalFunction<Rational>;

fn main() {
    // two doublets at 0 and 1 with a Bethe root at 1/2
    let u = RF::simple_pole(int(0), rat(1, 2))
        .add(&RF::simple_pole(int(1), rat(1, 2)))
        .unwrap()
        .add(&RF::simple_pole(rat(1, 2), int(-1)))
        .unwrap();
    let oper = miura_sl2(&u).unwrap();
    println!("∂² - q with q = {}", oper.projective());
    for x in [int(0), int(1)] {
        let r = oper_residues(&oper, &Point::Finite(x.clone())).unwrap();
        let obs = frobenius_obstruction(&oper, &x, 1, 0.0).unwrap();
        println!("at {x}: double pole {}, simple pole {}, obstruction {}", r.double, r.simple, obs[0]);
    }
    let inf = oper_residues(&oper, &Point::Infinity).unwrap();
    println!("at ∞: double pole {}", inf.double);
    println!("regular at the root 1/2: {}", regularity_check(&oper, &rat(1, 2), 0.0).regular);

    // moving the root off-shell leaves a pole there
    let off = RF::simple_pole(int(0), rat(1, 2))
        .add(&RF::simple_pole(int(1), rat(1, 2)))
        .unwrap()
        .add(&RF::simple_pole(rat(1, 3), int(-1)))
        .unwrap();
    let report = regularity_check(&miura_sl2(&off).unwrap(), &rat(1, 3), 0.0);
    println!("regular at 1/3 after moving the root: {}", report.regular);
}
