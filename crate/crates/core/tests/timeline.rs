use proptest::prelude::*;
use retrace_core::timeline::{assign_period, Fifth, Period};

#[test]
fn worked_example_lands_in_last_pre_fifth() {
    let a = assign_period(2011, 2002, 2012, 2020).unwrap();
    assert_eq!(a.period, Period::PPre);
    assert_eq!(a.fifth.unwrap().label(), "[0.61, 1.00]");
    assert_eq!(a.normalized_position(), Some(1.0));
}

#[test]
fn every_hundredth_has_exactly_one_bin() {
    for h in -100..=100 {
        let n = Fifth::ALL.iter().filter(|f| (f.bounds().0..=f.bounds().1).contains(&h)).count();
        assert_eq!(n, 1, "position {h}");
    }
    assert_eq!(Fifth::from_hundredths(101), None);
}

fn years() -> impl Strategy<Value = (i32, i32, i32, i32)> {
    (1950i32..2030, 0i32..15, 0i32..30, 0i32..10).prop_map(|(p, dr, dy, dl)| {
        let r = p + dr;
        let y = p + dy;
        (p, r, y, y.max(r) + dl)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn periods_and_positions_are_well_formed((p, r, y, l) in years(), shift in -500i32..500) {
        let a = assign_period(y, p, r, l).unwrap();
        let expected = if y < r { Period::PPre } else if y == r { Period::PRet } else { Period::PPost };
        prop_assert_eq!(a.period, expected);
        match a.position_hundredths {
            None => prop_assert_eq!(a.period, Period::PRet),
            Some(h) => {
                prop_assert!((-100..=100).contains(&h));
                let x = a.normalized_position().unwrap();
                prop_assert!((-1.0..=1.0).contains(&x));
                let f = a.fifth.unwrap();
                prop_assert!((f.bounds().0..=f.bounds().1).contains(&h));
            }
        }
        let moved = assign_period(y + shift, p + shift, r + shift, l + shift).unwrap();
        prop_assert_eq!(moved, a);
    }
}
