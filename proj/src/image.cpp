#include "tactsim/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tactsim::img {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[5],
                  const std::uint8_t* payload, std::size_t n) {
  put_u32(out, static_cast<std::uint32_t>(n));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  if (n) out.insert(out.end(), payload, payload + n);
  const auto crc =
      static_cast<std::uint32_t>(crc32(0L, out.data() + start, static_cast<uInt>(4 + n)));
  put_u32(out, crc);
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

Image8 Image8::make(int width, int height, int channels) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
    throw std::invalid_argument("Image8: bad dimensions");
  Image8 im;
  im.width = width;
  im.height = height;
  im.channels = channels;
  im.data.assign(static_cast<std::size_t>(width) * height * channels, 0);
  return im;
}

std::vector<std::uint8_t> encode_png(const Image8& im) {
  if (im.width <= 0 || im.height <= 0 || (im.channels != 1 && im.channels != 3))
    throw std::invalid_argument("encode_png: bad image");
  const std::size_t stride = static_cast<std::size_t>(im.width) * im.channels;
  std::vector<std::uint8_t> raw(im.height * (stride + 1));
  for (int y = 0; y < im.height; ++y) {
    raw[y * (stride + 1)] = 0;  // filter: none
    std::memcpy(&raw[y * (stride + 1) + 1], &im.data[y * stride], stride);
  }

  uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_size);
  if (compress2(comp.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw std::runtime_error("encode_png: deflate failed");
  comp.resize(comp_size);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::uint8_t ihdr[13];
  ihdr[0] = static_cast<std::uint8_t>(im.width >> 24);
  ihdr[1] = static_cast<std::uint8_t>(im.width >> 16);
  ihdr[2] = static_cast<std::uint8_t>(im.width >> 8);
  ihdr[3] = static_cast<std::uint8_t>(im.width);
  ihdr[4] = static_cast<std::uint8_t>(im.height >> 24);
  ihdr[5] = static_cast<std::uint8_t>(im.height >> 16);
  ihdr[6] = static_cast<std::uint8_t>(im.height >> 8);
  ihdr[7] = static_cast<std::uint8_t>(im.height);
  ihdr[8] = 8;
  ihdr[9] = im.channels == 3 ? 2 : 0;
  ihdr[10] = ihdr[11] = ihdr[12] = 0;
  append_chunk(out, "IHDR", ihdr, 13);
  append_chunk(out, "IDAT", comp.data(), comp.size());
  append_chunk(out, "IEND", nullptr, 0);
  return out;
}

Image8 decode_png(const std::uint8_t* bytes, std::size_t size) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (size < 8 || std::memcmp(bytes, sig, 8) != 0)
    throw std::runtime_error("decode_png: not a PNG");

  int width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 12 <= size) {
    const std::uint32_t len = read_u32(bytes + pos);
    const char* type = reinterpret_cast<const char*>(bytes + pos + 4);
    const std::uint8_t* payload = bytes + pos + 8;
    if (pos + 12 + len > size) throw std::runtime_error("decode_png: truncated chunk");
    if (std::memcmp(type, "IHDR", 4) == 0) {
      width = static_cast<int>(read_u32(payload));
      height = static_cast<int>(read_u32(payload + 4));
      const int depth = payload[8], color = payload[9], interlace = payload[12];
      if (depth != 8 || (color != 0 && color != 2) || interlace != 0)
        throw std::runtime_error("decode_png: unsupported format");
      channels = color == 2 ? 3 : 1;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (width <= 0 || height <= 0 || idat.empty())
    throw std::runtime_error("decode_png: missing chunks");

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  std::vector<std::uint8_t> raw(height * (stride + 1));
  uLongf raw_size = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_size != raw.size())
    throw std::runtime_error("decode_png: inflate failed");

  Image8 im = Image8::make(width, height, channels);
  const int bpp = channels;
  std::vector<std::uint8_t> prev(stride, 0);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = &raw[y * (stride + 1) + 1];
    std::uint8_t* dst = &im.data[y * stride];
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= static_cast<std::size_t>(bpp) ? prev[i - bpp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw std::runtime_error("decode_png: bad filter");
      }
      dst[i] = static_cast<std::uint8_t>(v & 0xff);
    }
    std::memcpy(prev.data(), dst, stride);
  }
  return im;
}

void write_file_atomic(const std::string& path, const void* bytes, std::size_t size) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out.write(static_cast<const char*>(bytes), static_cast<std::streamsize>(size));
    if (!out) throw std::runtime_error("short write: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_png(const std::string& path, const Image8& image) {
  const auto bytes = encode_png(image);
  write_file_atomic(path, bytes.data(), bytes.size());
}

Image8 read_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_png(bytes.data(), bytes.size());
}

namespace {

struct Span {
  int begin = 0;
  std::vector<double> weights;
};

std::vector<Span> coverage(int src, int dst) {
  std::vector<Span> spans(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int o = 0; o < dst; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    Span s;
    s.begin = static_cast<int>(lo);
    const int end = std::min(src, static_cast<int>(std::ceil(hi)));
    for (int i = s.begin; i < end; ++i) {
      const double cover = std::min(hi, static_cast<double>(i) + 1) -
                           std::max(lo, static_cast<double>(i));
      s.weights.push_back(std::max(0.0, cover) / scale);
    }
    spans[o] = std::move(s);
  }
  return spans;
}

}  // namespace

Image8 resample_area(const Image8& src, int out_width, int out_height) {
  if (out_width <= 0 || out_height <= 0 || out_width > src.width ||
      out_height > src.height)
    throw std::invalid_argument("resample_area: output must shrink the image");
  const auto cols = coverage(src.width, out_width);
  const auto rows = coverage(src.height, out_height);
  const int ch = src.channels;

  // Horizontal pass into doubles, then vertical pass with final rounding.
  std::vector<double> mid(static_cast<std::size_t>(out_width) * src.height * ch, 0.0);
  for (int y = 0; y < src.height; ++y)
    for (int ox = 0; ox < out_width; ++ox) {
      const auto& s = cols[ox];
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s.weights.size(); ++k)
          acc += s.weights[k] * src.at(s.begin + static_cast<int>(k), y, c);
        mid[(static_cast<std::size_t>(y) * out_width + ox) * ch + c] = acc;
      }
    }

  Image8 out = Image8::make(out_width, out_height, ch);
  for (int oy = 0; oy < out_height; ++oy)
    for (int ox = 0; ox < out_width; ++ox) {
      const auto& s = rows[oy];
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s.weights.size(); ++k)
          acc += s.weights[k] *
                 mid[((s.begin + k) * static_cast<std::size_t>(out_width) + ox) * ch + c];
        const long v = std::lround(acc);
        out.at(ox, oy, c) = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
      }
    }
  return out;
}

double mean_abs_diff(const Image8& a, const Image8& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw std::invalid_argument("mean_abs_diff: shape mismatch");
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    sum += static_cast<std::uint64_t>(std::abs(int(a.data[i]) - int(b.data[i])));
  return a.data.empty() ? 0.0 : static_cast<double>(sum) / a.data.size();
}

}  // namespace tactsim::img
