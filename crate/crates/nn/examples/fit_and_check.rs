//! Fits a two-layer convolutional net to a fixed target with Adam, then
//! compares its tape gradients against central differences.

use std::collections::BTreeMap;

use mcgan_nn::gradcheck::check_gradients;
use mcgan_nn::{
    forward, receptive_field, Adam, AdamConfig, ForwardCtx, Graph, LayerSpec, Mode, NetworkSpec, ParamSet, Resample,
    Tensor,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn loss_of(spec: &NetworkSpec, params: &ParamSet, x: &Tensor, y: &Tensor) -> (Graph, mcgan_nn::Var, mcgan_nn::Bound) {
    let mut g = Graph::new();
    let b = params.bind(&mut g, true);
    let xv = g.input(x.clone());
    let yv = g.input(y.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut ctx = ForwardCtx::new(Mode::Eval, &mut rng);
    let out = forward(spec, &mut g, &b, params, xv, &mut ctx).unwrap();
    let d = g.sub(out, yv).unwrap();
    let sq = g.square(d);
    let loss = g.mean(sq);
    (g, loss, b)
}

fn main() {
    let spec = NetworkSpec::new(
        "toy",
        vec![
            LayerSpec::conv(1, 4, 3, Resample::Keep),
            LayerSpec::LeakyRelu { slope: 0.2 },
            LayerSpec::conv(4, 1, 3, Resample::Keep),
            LayerSpec::Tanh,
        ],
    );
    println!("receptive field {}", receptive_field(&spec).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut params = ParamSet::init(&spec, &mut rng).unwrap();
    let x = Tensor::uniform(&[2, 1, 8, 8], 1.0, &mut rng);
    let y = x.map(|v| 0.5 * v);

    let mut adam = Adam::new(AdamConfig {
        lr: 1e-2,
        ..AdamConfig::default()
    });
    for i in 0..200 {
        let (g, loss, b) = loss_of(&spec, &params, &x, &y);
        if i % 50 == 0 {
            println!("step {i:>3}  mse {:.5}", g.value(loss).item());
        }
        let mut grads = g.backward(loss).unwrap();
        adam.step(&mut params, &b.gradients(&mut grads)).unwrap();
    }

    let (g, loss, b) = loss_of(&spec, &params, &x, &y);
    let analytic = b.gradients(&mut g.backward(loss).unwrap());
    let numeric = |p: &BTreeMap<String, Tensor>| {
        let mut trial = params.clone();
        trial.params = p.clone();
        let (g, loss, _) = loss_of(&spec, &trial, &x, &y);
        g.value(loss).item()
    };
    let bad = check_gradients(&params.params, &analytic, numeric, 1e-6, 1e-4, 1e-8, None);
    println!("{} gradient entries disagree", bad.len());
}
