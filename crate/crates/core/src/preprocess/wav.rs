use std::io::{Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioBuffer, PreprocessError};

/// On-disk sample encoding used by [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavEncoding {
    Pcm16,
    #[default]
    Float32,
}

/// Read a PCM WAV file and downmix it to mono by averaging channels.
///
/// Integer samples are scaled by `2^(bits-1)`, so full scale maps to [-1, 1).
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, PreprocessError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| PreprocessError::Unreadable(format!("{}: {e}", path.display())))?;
    read_wav(std::io::BufReader::new(file))
}

pub fn read_wav<R: Read>(reader: R) -> Result<AudioBuffer, PreprocessError> {
    let reader = WavReader::new(reader).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(PreprocessError::UnsupportedEncoding("zero channels".into()));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(map_hound)?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (fmt, bits) => {
            return Err(PreprocessError::UnsupportedEncoding(format!("{fmt:?} {bits}-bit")));
        }
    };
    if interleaved.len() < channels {
        return Err(PreprocessError::EmptyAudio);
    }
    let mono: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    AudioBuffer::new(mono, spec.sample_rate)
}

fn map_hound(e: hound::Error) -> PreprocessError {
    match e {
        hound::Error::IoError(e) => PreprocessError::Unreadable(e.to_string()),
        hound::Error::FormatError(m) if m.starts_with("bits per sample") => {
            PreprocessError::UnsupportedEncoding(m.to_string())
        }
        hound::Error::FormatError(m) => PreprocessError::Unreadable(format!("malformed WAV: {m}")),
        hound::Error::Unsupported => PreprocessError::UnsupportedEncoding("unsupported WAV feature".into()),
        other => PreprocessError::UnsupportedEncoding(other.to_string()),
    }
}

/// Write a mono buffer as a RIFF WAV file.
pub fn write_wav(path: impl AsRef<Path>, buf: &AudioBuffer, encoding: WavEncoding) -> Result<(), PreprocessError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path)
        .map_err(|e| PreprocessError::Unreadable(format!("{}: {e}", path.display())))?;
    write_wav_to(std::io::BufWriter::new(file), buf, encoding)
}

fn write_wav_to<W: Write + Seek>(w: W, buf: &AudioBuffer, encoding: WavEncoding) -> Result<(), PreprocessError> {
    let spec = match encoding {
        WavEncoding::Pcm16 => WavSpec {
            channels: 1,
            sample_rate: buf.sample_rate(),
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        },
        WavEncoding::Float32 => WavSpec {
            channels: 1,
            sample_rate: buf.sample_rate(),
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        },
    };
    let mut writer = WavWriter::new(w, spec).map_err(map_hound)?;
    for &s in buf.samples() {
        match encoding {
            WavEncoding::Pcm16 => {
                let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(v).map_err(map_hound)?;
            }
            WavEncoding::Float32 => writer.write_sample(s as f32).map_err(map_hound)?,
        }
    }
    writer.finalize().map_err(map_hound)
}
