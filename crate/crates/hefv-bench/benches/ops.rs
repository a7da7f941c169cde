use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hefv::encoding::encode_int;
use hefv::params::default_params;
use hefv::ring::RingElement;
use hefv::sampling::{sample_uniform_rq, RandomSource};
use hefv::scheme::{decrypt, encrypt, he_add, he_mul, he_mul_raw, keygen, relinearise};
use hefv::BigInt;

struct Setup {
    params: Arc<hefv::params::ParamSet>,
    sk: hefv::scheme::SecretKey,
    pk: hefv::scheme::PublicKey,
    rk: hefv::scheme::RelinKey,
    c1: hefv::scheme::Ciphertext,
    c2: hefv::scheme::Ciphertext,
}

fn setup() -> Setup {
    let params = Arc::new(default_params());
    let mut rng = RandomSource::seeded(b"bench");
    let (sk, pk, rk) = keygen(&params, &mut rng).unwrap();
    let c1 = encrypt(&pk, &encode_int(&BigInt::from(42), &params).unwrap(), &mut rng).unwrap();
    let c2 = encrypt(&pk, &encode_int(&BigInt::from(7), &params).unwrap(), &mut rng).unwrap();
    Setup {
        params,
        sk,
        pk,
        rk,
        c1,
        c2,
    }
}

fn bench_ring_mul(c: &mut Criterion) {
    let s = setup();
    let mut rng = RandomSource::seeded(b"ring mul");
    let a = sample_uniform_rq(s.params.ring(), &mut rng);
    let b = sample_uniform_rq(s.params.ring(), &mut rng);
    c.bench_function("ring_mul_n4096_q128", |bench| {
        bench.iter(|| black_box(a.mul(black_box(&b)).unwrap()))
    });
    c.bench_function("ring_mul_lifted_n4096_q128", |bench| {
        bench.iter(|| black_box(a.mul_lifted(black_box(&b)).unwrap()))
    });
}

fn bench_scheme_ops(c: &mut Criterion) {
    let s = setup();
    let mut rng = RandomSource::seeded(b"scheme ops");
    let pt = encode_int(&BigInt::from(12345), &s.params).unwrap();

    c.bench_function("encrypt", |bench| {
        bench.iter(|| black_box(encrypt(&s.pk, &pt, &mut rng).unwrap()))
    });
    c.bench_function("decrypt", |bench| {
        bench.iter(|| black_box(decrypt(&s.sk, &s.c1).unwrap()))
    });
    c.bench_function("he_add", |bench| {
        bench.iter(|| black_box(he_add(&s.c1, &s.c2).unwrap()))
    });
    let raw = he_mul_raw(&s.c1, &s.c2).unwrap();
    c.bench_function("he_mul_raw", |bench| {
        bench.iter(|| black_box(he_mul_raw(&s.c1, &s.c2).unwrap()))
    });
    c.bench_function("relinearise", |bench| {
        bench.iter(|| black_box(relinearise(&raw, &s.rk).unwrap()))
    });
    c.bench_function("he_mul", |bench| {
        bench.iter(|| black_box(he_mul(&s.c1, &s.c2, &s.rk).unwrap()))
    });
}

fn bench_scale_round(c: &mut Criterion) {
    let s = setup();
    let mut rng = RandomSource::seeded(b"scale");
    let a = sample_uniform_rq(s.params.ring(), &mut rng);
    let b = sample_uniform_rq(s.params.ring(), &mut rng);
    let lifted = a.mul_lifted(&b).unwrap();
    let t = s.params.t().clone();
    let q = s.params.q().clone();
    c.bench_function("scale_round_n4096", |bench| {
        bench.iter(|| black_box(lifted.scale_round(&t, &q)))
    });
    let _ = RingElement::zero(s.params.ring());
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_ring_mul, bench_scheme_ops, bench_scale_round
}
criterion_main!(benches);
