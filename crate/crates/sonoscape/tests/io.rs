use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sonoscape::io;
use sonoscape_core::audio::{StereoBuffer, VoiceEngine, DEFAULT_SAMPLE_RATE};
use sonoscape_core::grid::AZIMUTHS_DEG;
use sonoscape_core::grid::ELEVATIONS_DEG;
use sonoscape_core::{GrayImage, SalientMask};

fn le16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

/// Walks the RIFF chunks by hand: (format tag, channels, rate, bits, data).
fn parse_wav(bytes: &[u8]) -> (u16, u16, u32, u16, Vec<i16>) {
    assert_eq!(&bytes[..4], b"RIFF");
    assert_eq!(le32(bytes, 4) as usize, bytes.len() - 8);
    assert_eq!(&bytes[8..12], b"WAVE");
    let mut at = 12;
    let mut fmt = None;
    let mut data = None;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let len = le32(bytes, at + 4) as usize;
        let body = &bytes[at + 8..at + 8 + len];
        match id {
            b"fmt " => fmt = Some((le16(body, 0), le16(body, 2), le32(body, 4), le16(body, 14))),
            b"data" => data = Some(body.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect()),
            _ => {}
        }
        at += 8 + len + len % 2;
    }
    let (tag, ch, rate, bits) = fmt.expect("fmt chunk");
    (tag, ch, rate, bits, data.expect("data chunk"))
}

#[test]
fn wav_layout_matches_hand_parse() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 777;
    let audio = StereoBuffer {
        left: (0..n).map(|_| rng.gen_range(-1.2..1.2)).collect(),
        right: (0..n).map(|_| rng.gen_range(-1.2..1.2)).collect(),
    };
    let bytes = io::wav_bytes(&audio, DEFAULT_SAMPLE_RATE);
    let (tag, ch, rate, bits, samples) = parse_wav(&bytes);
    assert_eq!((tag, ch, rate, bits), (1, 2, 44_100, 16));
    assert_eq!(samples.len(), 2 * n);
    for i in 0..n {
        for (k, x) in [audio.left[i], audio.right[i]].into_iter().enumerate() {
            // Oracle: clip, scale by 32767, round half away from zero.
            let want = (x.clamp(-1.0, 1.0) * 32767.0).round() as i16;
            assert_eq!(samples[2 * i + k], want, "frame {i} channel {k}");
        }
    }
}

#[test]
fn wav_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub/out.wav");
    let audio = StereoBuffer {
        left: vec![0.0, 0.5, -0.5, 1.0],
        right: vec![0.25, -1.0, 0.0, 0.75],
    };
    io::write_wav(&path, &audio, 48_000).unwrap();
    let back = io::read_float_wav(&path).unwrap();
    assert_eq!(back.sample_rate, 48_000);
    assert_eq!(back.channels.len(), 2);
    for (got, want) in back.channels[0].iter().zip(&audio.left) {
        assert!((got - want).abs() < 1.0 / 32767.0);
    }
    for (got, want) in back.channels[1].iter().zip(&audio.right) {
        assert!((got - want).abs() < 1.0 / 32767.0);
    }
}

#[test]
fn float_wav_is_read_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.wav");
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: 44_100,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(&path, spec).unwrap();
    for x in [0.125f32, -0.5, 0.0, 1.0] {
        w.write_sample(x).unwrap();
    }
    w.finalize().unwrap();
    let back = io::read_float_wav(&path).unwrap();
    assert_eq!(back.channels, vec![vec![0.125, -0.5, 0.0, 1.0]]);
}

fn random_image(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

#[test]
fn gray_images_round_trip_through_png_and_pgm() {
    let dir = tempfile::tempdir().unwrap();
    for (i, ext) in ["png", "pgm"].into_iter().enumerate() {
        let img = random_image(i as u64, 17, 9);
        let path = dir.path().join(format!("img.{ext}"));
        io::save_gray(&path, &img).unwrap();
        assert_eq!(io::load_gray(&path).unwrap(), img, "{ext}");
    }
    let pgm = std::fs::read(dir.path().join("img.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5"), "binary graymap");
}

#[test]
fn colour_images_use_601_luma() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rgb.png");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rgb = image::RgbImage::from_fn(8, 8, |_, _| image::Rgb([rng.gen(), rng.gen(), rng.gen()]));
    rgb.save(&path).unwrap();
    let gray = io::load_gray(&path).unwrap();
    for (x, y, p) in rgb.enumerate_pixels() {
        let [r, g, b] = p.0;
        // Integer form of 0.299 R + 0.587 G + 0.114 B, rounded.
        let want = ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8;
        assert_eq!(gray.get(x as usize, y as usize), want);
    }
}

#[test]
fn mask_is_black_and_white() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.png");
    let mask = SalientMask::from_fn(5, 4, |x, y| x == y).unwrap();
    io::save_mask(&path, &mask).unwrap();
    let img = io::load_gray(&path).unwrap();
    for y in 0..4 {
        for x in 0..5 {
            assert_eq!(img.get(x, y), if x == y { 255 } else { 0 });
        }
    }
}

#[test]
fn unsupported_output_extension() {
    let dir = tempfile::tempdir().unwrap();
    let img = GrayImage::filled(2, 2, 0).unwrap();
    assert!(io::save_gray(&dir.path().join("x.jpg"), &img).is_err());
    assert!(io::load_gray(&dir.path().join("missing.png")).is_err());
}

fn write_mono(path: &Path, samples: &[f64], rate: u32) {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        w.write_sample(s as f32).unwrap();
    }
    w.finalize().unwrap();
}

/// Writes a full HRIR set (unit impulses at lag `col`) and returns the
/// manifest path. `skip` leaves one direction out.
fn hrir_dir(dir: &Path, rate: u32, skip: Option<(i32, i32)>) -> std::path::PathBuf {
    let mut manifest = String::from("# az el left right\n");
    for (r, &el) in ELEVATIONS_DEG.iter().enumerate() {
        for (c, &az) in AZIMUTHS_DEG.iter().enumerate() {
            if skip == Some((az, el)) {
                continue;
            }
            let mut l = vec![0.0; 4];
            let mut rr = vec![0.0; 4];
            l[c] = 0.5;
            rr[3 - c] = 0.25 * (r + 1) as f64;
            let (lp, rp) = (format!("l{r}{c}.wav"), format!("r{r}{c}.wav"));
            write_mono(&dir.join(&lp), &l, rate);
            write_mono(&dir.join(&rp), &rr, rate);
            manifest.push_str(&format!("{az} {el} {lp} {rp}\n"));
        }
    }
    let path = dir.join("hrir.txt");
    std::fs::write(&path, manifest).unwrap();
    path
}

#[test]
fn hrir_manifest_loads_all_directions() {
    let dir = tempfile::tempdir().unwrap();
    let set = io::load_hrir_set(&hrir_dir(dir.path(), 44_100, None)).unwrap();
    assert_eq!(set.sample_rate(), 44_100);
    for r in 0..3 {
        for c in 0..4 {
            let h = set.get(r * 4 + c);
            assert_eq!(h.left()[c], 0.5);
            assert_eq!(h.right()[3 - c], 0.25 * (r + 1) as f64);
        }
    }
}

#[test]
fn hrir_manifest_missing_direction_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = io::load_hrir_set(&hrir_dir(dir.path(), 44_100, Some((30, 0)))).unwrap_err();
    assert!(err.to_string().contains("30"), "{err}");
}

#[test]
fn hrir_rate_must_match_the_engine() {
    let dir = tempfile::tempdir().unwrap();
    let set = io::load_hrir_set(&hrir_dir(dir.path(), 48_000, None)).unwrap();
    let bank = sonoscape_core::audio::SoundBank::synthetic(44_100);
    assert!(VoiceEngine::new(set, bank, 44_100, 1024).is_err());
}

#[test]
fn hrir_manifest_syntax() {
    let p = Path::new("/data/hrir/manifest.txt");
    let entries = io::parse_hrir_manifest("# c\n\n-90 45 a.wav b.wav\n30 0 /abs/s.wav\n", p).unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(
        entries[0].2,
        io::HrirSource::Pair {
            left: "/data/hrir/a.wav".into(),
            right: "/data/hrir/b.wav".into()
        }
    );
    assert_eq!(entries[1].2, io::HrirSource::Stereo("/abs/s.wav".into()));
    assert!(io::parse_hrir_manifest("x 0 a.wav\n", p).is_err());
    let err = io::parse_hrir_manifest("0 0\n", p).unwrap_err();
    assert!(err.to_string().contains(":1:"), "{err}");
}

#[test]
fn sound_manifest_downmixes_to_mono() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for name in ["birds", "trees", "waves"] {
        let path = dir.path().join(format!("{name}.wav"));
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 44_100,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for i in 0..100 {
            w.write_sample(i as f32 / 100.0).unwrap();
            w.write_sample(0.0f32).unwrap();
        }
        w.finalize().unwrap();
        manifest.push_str(&format!("{name} {name}.wav 100\n"));
    }
    let mpath = dir.path().join("sounds.txt");
    std::fs::write(&mpath, &manifest).unwrap();
    let bank = io::load_sound_bank(&mpath).unwrap();
    assert_eq!(bank.sample_rate(), 44_100);
    assert!(io::parse_sound_manifest("owls a.wav 10\n", &mpath).is_err());
    assert!(io::parse_sound_manifest("birds a.wav ten\n", &mpath).is_err());
}

#[test]
fn config_file_parsing() {
    let p = Path::new("/etc/sonoscape/preset.conf");
    let cfg = io::Config::parse(
        "# preset\nthresh = 0.5\niterations=2\nsample_rate = 48000\nhrir = h/manifest.txt\n",
        p,
    )
    .unwrap();
    assert_eq!(cfg.thresh, Some(0.5));
    assert_eq!(cfg.iterations, Some(2));
    assert_eq!(cfg.sample_rate, Some(48_000));
    assert_eq!(cfg.hrir.as_deref(), Some(Path::new("/etc/sonoscape/h/manifest.txt")));
    assert_eq!(cfg.block_size, None);
    assert!(io::Config::parse("treshold = 0.5\n", p).is_err());
    assert!(io::Config::parse("thresh = high\n", p).is_err());
    assert!(io::Config::parse("thresh\n", p).is_err());
}

#[test]
fn tables_with_various_delimiters() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("a.csv", "time,errors\n1.5,2\n3,4\n"),
        ("b.tsv", "# note\n1.5\t2\n3\t4\n"),
        ("c.txt", "1.5 2\n3   4\n"),
        ("d.csv", "1.5;2\n3;4\n"),
    ] {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        assert_eq!(io::read_table(&p).unwrap(), vec![vec![1.5, 2.0], vec![3.0, 4.0]], "{name}");
        assert_eq!(io::read_columns(&p, 2).unwrap(), vec![vec![1.5, 3.0], vec![2.0, 4.0]]);
        assert!(io::read_columns(&p, 3).is_err());
    }
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,x\n").unwrap();
    assert!(io::read_table(&bad).is_err());
}

#[test]
fn trial_logs_round_trip_through_files() {
    use sonoscape_core::sim::{Control, Trial};
    let dir = tempfile::tempdir().unwrap();
    let mut t = Trial::new(3);
    t.set_control(Control {
        forward: 1,
        ..Default::default()
    });
    for _ in 0..30 {
        t.advance(100);
    }
    t.mark();
    t.abort(sonoscape_core::sim::AbortReason::ClientEnd);
    let path = dir.path().join("logs/t.log");
    io::write_trial_log(&path, t.log()).unwrap();
    assert_eq!(&io::read_trial_log(&path).unwrap(), t.log());
    std::fs::write(&path, "0 start seed=1\n5 teleport\n").unwrap();
    assert!(io::read_trial_log(&path).is_err());
}
