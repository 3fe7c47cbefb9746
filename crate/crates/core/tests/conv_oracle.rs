mod common;

use common::naive_conv;
use har_core::nn::{conv1d_forward, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn draw(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect()
}

#[test]
fn bitwise_equal_on_every_small_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut shapes = 0;
    for c_in in 1..=4 {
        for c_out in 1..=4 {
            for len in 1..=8 {
                for k in 1..=len {
                    for _ in 0..3 {
                        let x = draw(&mut rng, c_in * len);
                        let w = draw(&mut rng, c_out * c_in * k);
                        let b = draw(&mut rng, c_out);
                        let got = conv1d_forward(
                            &Tensor::from_vec(&[c_in, len], x.clone()).unwrap(),
                            &Tensor::from_vec(&[c_out, c_in, k], w.clone()).unwrap(),
                            &b,
                        )
                        .unwrap();
                        let want = naive_conv(&x, c_in, len, &w, c_out, k, &b);
                        assert_eq!(got.shape(), &[c_out, len - k + 1]);
                        for (g, e) in got.data().iter().zip(&want) {
                            assert_eq!(g.to_bits(), e.to_bits(), "C_in={c_in} C_out={c_out} L={len} K={k}");
                        }
                    }
                    shapes += 1;
                }
            }
        }
    }
    assert_eq!(shapes, 16 * 36);
}

#[test]
fn kernel_longer_than_input_is_rejected() {
    let x = Tensor::zeros(&[1, 3]);
    let w = Tensor::zeros(&[1, 1, 4]);
    assert!(conv1d_forward(&x, &w, &[0.0]).is_err());
}
