use optframe_core::optimizer::Lbfgs;
use optframe_core::problems::AbsoluteSum;

fn main() {
    let mut f = AbsoluteSum::new(2).unwrap();
    let _ = Lbfgs::default().minimize(&mut f, &[1.0, 2.0]);
}
