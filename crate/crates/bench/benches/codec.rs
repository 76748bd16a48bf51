use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cawl::entropy::{ac_decode, ac_encode};
use cawl::lifting::{lift_pair_forward, WarpPair};
use cawl::motion::estimate_block_motion;
use cawl::spatial::{decode_frame_lossless, encode_frame_lossless};
use cawl::{
    decode_sequence, encode_sequence, EncodeConfig, Frame, McMode, McParams, Sequence, SubbandKind,
};

/// Textured frames drifting one pixel right per frame, with mild noise.
fn moving_sequence(w: usize, h: usize, t: usize) -> Sequence {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let texture: Vec<i32> = (0..(w + t) * h).map(|_| rng.gen_range(0..256)).collect();
    let frames = (0..t)
        .map(|i| {
            let s = (0..w * h)
                .map(|p| {
                    let (x, y) = (p % w, p / w);
                    (texture[y * (w + t) + x + t - i] + rng.gen_range(-1..=1)).clamp(0, 255)
                })
                .collect();
            Frame::new(w, h, s).unwrap()
        })
        .collect();
    Sequence::new(frames).unwrap()
}

fn range_coder(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bits: Vec<(bool, usize)> = (0..1 << 16).map(|i| (rng.gen_bool(0.2), i % 4)).collect();
    let schedule: Vec<usize> = bits.iter().map(|&(_, c)| c).collect();
    let stream = ac_encode(&bits, 4);
    let mut g = c.benchmark_group("range_coder");
    g.throughput(Throughput::Elements(bits.len() as u64));
    g.bench_function("encode", |b| b.iter(|| ac_encode(black_box(&bits), 4)));
    g.bench_function("decode", |b| {
        b.iter(|| ac_decode(black_box(&stream), &schedule, 4).unwrap())
    });
    g.finish();
}

fn spatial(c: &mut Criterion) {
    let frame = moving_sequence(352, 288, 1).frames()[0].to_coefficients();
    let bytes = encode_frame_lossless(&frame).unwrap();
    let mut g = c.benchmark_group("spatial_cif");
    g.throughput(Throughput::Elements(frame.pixel_count() as u64));
    g.bench_function("encode", |b| {
        b.iter(|| encode_frame_lossless(black_box(&frame)).unwrap())
    });
    g.bench_function("decode", |b| {
        b.iter(|| decode_frame_lossless(black_box(&bytes), 352, 288, SubbandKind::Lowpass).unwrap())
    });
    g.finish();
}

fn motion_and_lifting(c: &mut Criterion) {
    let seq = moving_sequence(352, 288, 2);
    let (a, b) = (
        seq.frames()[0].to_coefficients(),
        seq.frames()[1].to_coefficients(),
    );
    let params = McParams::default();
    let mut g = c.benchmark_group("temporal_cif");
    g.sample_size(10);
    for range in [4, 8, 16] {
        g.bench_with_input(
            BenchmarkId::new("block_search", range),
            &range,
            |bench, &r| bench.iter(|| estimate_block_motion(&a, &b, r, &params).unwrap()),
        );
    }
    g.bench_function("haar_pair", |bench| {
        bench.iter(|| lift_pair_forward(black_box(&a), black_box(&b), WarpPair::Identity).unwrap())
    });
    g.finish();
}

fn end_to_end(c: &mut Criterion) {
    let seq = moving_sequence(176, 144, 16);
    let mut g = c.benchmark_group("qcif_16_frames");
    g.sample_size(10);
    for mc_mode in [McMode::None, McMode::Block] {
        let config = EncodeConfig {
            i_max: 4,
            mc_mode,
            ..Default::default()
        };
        let bytes = encode_sequence(&seq, &config).unwrap().bytes;
        g.bench_function(format!("encode_{mc_mode:?}"), |b| {
            b.iter(|| encode_sequence(&seq, &config).unwrap())
        });
        g.bench_function(format!("decode_{mc_mode:?}"), |b| {
            b.iter(|| decode_sequence(&bytes).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    range_coder,
    spatial,
    motion_and_lifting,
    end_to_end
);
criterion_main!(benches);
