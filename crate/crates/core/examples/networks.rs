//! Build the teacher/student parameter set, run one batch through every
//! network and round-trip it through a checkpoint file.
//!
//!     cargo run --example networks

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use velo::nn::{body_hash, ArchConfig, Checkpoint, ParameterSet, PolicyKind};
use velo::sim::EnvConfig;

fn main() -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let arch = ArchConfig::default();
    let params = ParameterSet::<f32>::init(&arch, &mut rng)?;
    println!("parameters: {}", params.num_params());
    for (name, net) in [
        ("encoder", &params.encoder),
        ("adaptation", &params.adaptation),
        ("body", &params.body),
        ("value", &params.value),
    ] {
        println!("  {name:<10} {:?}", net.shape());
    }

    let batch = 4;
    let d = Array2::from_shape_fn((batch, params.encoder.input_dim()), |_| rng.gen_range(-1.0f32..1.0));
    let h = Array2::from_shape_fn((batch, params.adaptation.input_dim()), |_| rng.gen_range(-1.0f32..1.0));
    let x = Array2::from_shape_fn((batch, 9), |_| rng.gen_range(-1.0f32..1.0));
    let z = params.encoder_forward(d.view())?;
    let z_hat = params.adaptation_forward(h.view())?;
    let a = params.policy_forward(x.view(), z.view())?;
    let v = params.value_forward(x.view(), z.view())?;
    println!("z {:?}  z_hat {:?}  action {:?}  value {:?}", z.dim(), z_hat.dim(), a.dim(), v.dim());

    let dir = tempfile_dir()?;
    let path = dir.join("teacher.ckpt");
    Checkpoint::new(PolicyKind::Teacher, "example".into(), 0, arch, EnvConfig::default(), params.clone()).save(&path)?;
    let back = Checkpoint::load(&path)?;
    println!("checkpoint {} bytes, body hash {}", std::fs::metadata(&path)?.len(), &body_hash(&back.params.body)[..16]);
    assert_eq!(back.params.policy_forward(x.view(), z.view())?, a);
    std::fs::remove_dir_all(dir)?;
    Ok(())
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let d = std::env::temp_dir().join(format!("velo-networks-{}", std::process::id()));
    std::fs::create_dir_all(&d)?;
    Ok(d)
}
