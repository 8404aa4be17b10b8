use num_traits::Float;

use super::{lit, Lab};

/// CIEDE2000 color difference with unit weighting factors
/// (`kL = kC = kH = 1`).
pub fn ciede2000<T: Float>(c1: Lab<T>, c2: Lab<T>) -> T {
    let two: T = lit(2.0);
    let pow7 = |x: T| x.powi(7);
    let twenty_five_7: T = lit(6_103_515_625.0); // 25^7

    let c1_ab = c1.a.hypot(c1.b);
    let c2_ab = c2.a.hypot(c2.b);
    let c_bar = (c1_ab + c2_ab) / two;
    let g = lit::<T>(0.5) * (T::one() - (pow7(c_bar) / (pow7(c_bar) + twenty_five_7)).sqrt());

    let a1p = (T::one() + g) * c1.a;
    let a2p = (T::one() + g) * c2.a;
    let c1p = a1p.hypot(c1.b);
    let c2p = a2p.hypot(c2.b);

    let hue = |b: T, ap: T| {
        if b == T::zero() && ap == T::zero() {
            T::zero()
        } else {
            let h = b.atan2(ap).to_degrees();
            if h < T::zero() {
                h + lit(360.0)
            } else {
                h
            }
        }
    };
    let h1p = hue(c1.b, a1p);
    let h2p = hue(c2.b, a2p);

    let dl = c2.l - c1.l;
    let dc = c2p - c1p;
    let chroma_product = c1p * c2p;
    let dh_angle = if chroma_product == T::zero() {
        T::zero()
    } else {
        let d = h2p - h1p;
        if d > lit(180.0) {
            d - lit(360.0)
        } else if d < lit(-180.0) {
            d + lit(360.0)
        } else {
            d
        }
    };
    let dh = two * chroma_product.sqrt() * (dh_angle / two).to_radians().sin();

    let l_bar = (c1.l + c2.l) / two;
    let cp_bar = (c1p + c2p) / two;
    let hp_bar = if chroma_product == T::zero() {
        h1p + h2p
    } else if (h1p - h2p).abs() <= lit(180.0) {
        (h1p + h2p) / two
    } else if h1p + h2p < lit(360.0) {
        (h1p + h2p + lit(360.0)) / two
    } else {
        (h1p + h2p - lit(360.0)) / two
    };

    let t = T::one() - lit::<T>(0.17) * (hp_bar - lit(30.0)).to_radians().cos()
        + lit::<T>(0.24) * (two * hp_bar).to_radians().cos()
        + lit::<T>(0.32) * (lit::<T>(3.0) * hp_bar + lit(6.0)).to_radians().cos()
        - lit::<T>(0.20) * (lit::<T>(4.0) * hp_bar - lit(63.0)).to_radians().cos();
    let d_theta = lit::<T>(30.0) * (-((hp_bar - lit(275.0)) / lit(25.0)).powi(2)).exp();
    let r_c = two * (pow7(cp_bar) / (pow7(cp_bar) + twenty_five_7)).sqrt();
    let l50 = (l_bar - lit(50.0)).powi(2);
    let s_l = T::one() + lit::<T>(0.015) * l50 / (lit::<T>(20.0) + l50).sqrt();
    let s_c = T::one() + lit::<T>(0.045) * cp_bar;
    let s_h = T::one() + lit::<T>(0.015) * cp_bar * t;
    let r_t = -(two * d_theta).to_radians().sin() * r_c;

    let tl = dl / s_l;
    let tc = dc / s_c;
    let th = dh / s_h;
    (tl * tl + tc * tc + th * th + r_t * tc * th).max(T::zero()).sqrt()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn lab() -> impl Strategy<Value = Lab<f64>> {
        (0.0..100.0f64, -128.0..127.0f64, -128.0..127.0f64).prop_map(|(l, a, b)| Lab::new(l, a, b))
    }

    #[test]
    fn identical_is_zero() {
        let c = Lab::new(40.0, 12.5, -33.0);
        assert_eq!(ciede2000(c, c), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn symmetric_and_nonnegative(x in lab(), y in lab()) {
            let d1 = ciede2000(x, y);
            let d2 = ciede2000(y, x);
            prop_assert!(d1 >= 0.0);
            prop_assert!((d1 - d2).abs() < 1e-9);
            if x != y {
                prop_assert!(d1 > 0.0);
            }
        }
    }
}
