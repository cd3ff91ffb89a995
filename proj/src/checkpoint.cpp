#include "omtree/approximator.hpp"
#include "omtree/error.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

namespace omtree {

namespace {

constexpr char kMagic[8] = {'O', 'M', 'T', 'R', 'C', 'K', 'P', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& buf) : buf_(buf) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw Error(ErrorCode::Checksum, "checkpoint truncated");
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::string& data, std::size_t len) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(len)));
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<CheckpointRecord>& records) {
  std::string buf(kMagic, sizeof kMagic);
  put_u32(buf, kCheckpointVersion);
  put_u32(buf, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    put_u32(buf, static_cast<std::uint32_t>(r.name.size()));
    buf += r.name;
    put_u64(buf, r.spec_hash);
    put_u64(buf, static_cast<std::uint64_t>(r.values.size()));
    for (Eigen::Index i = 0; i < r.values.size(); ++i) {
      std::uint64_t bits;
      const double v = r.values[i];
      std::memcpy(&bits, &v, sizeof bits);
      put_u64(buf, bits);
    }
  }
  put_u32(buf, crc_of(buf, buf.size()));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write checkpoint " + tmp);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot move checkpoint into place: " + ec.message());
}

std::vector<CheckpointRecord> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open checkpoint " + path);
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof kMagic + 12 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
    throw Error(ErrorCode::Checksum, "not a checkpoint file: " + path);
  {
    Reader tail(buf);
    tail.bytes(buf.size() - 4);
    if (tail.u32() != crc_of(buf, buf.size() - 4))
      throw Error(ErrorCode::Checksum, "checkpoint checksum mismatch: " + path);
  }
  Reader r(buf);
  r.bytes(sizeof kMagic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  std::vector<CheckpointRecord> records;
  for (std::uint32_t k = 0; k < count; ++k) {
    CheckpointRecord rec;
    rec.name = r.bytes(r.u32());
    rec.spec_hash = r.u64();
    const std::uint64_t n = r.u64();
    if (n > r.remaining() / 8) throw Error(ErrorCode::Checksum, "checkpoint record overruns file");
    rec.values.resize(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::uint64_t bits = r.u64();
      double v;
      std::memcpy(&v, &bits, sizeof v);
      rec.values[static_cast<Eigen::Index>(i)] = v;
    }
    records.push_back(std::move(rec));
  }
  if (r.remaining() != 4) throw Error(ErrorCode::Checksum, "trailing bytes in checkpoint");
  return records;
}

void append_records(std::vector<CheckpointRecord>& out, const std::string& prefix,
                    const ParameterSet& params) {
  out.push_back({prefix + ".params", params.spec.hash(), params.values});
}

void append_records(std::vector<CheckpointRecord>& out, const std::string& prefix,
                    const AdamState& opt, std::uint64_t spec_hash) {
  Eigen::VectorXd scalars(5);
  scalars << opt.learning_rate, opt.beta1, opt.beta2, opt.epsilon, static_cast<double>(opt.step);
  out.push_back({prefix + ".adam.scalars", spec_hash, scalars});
  out.push_back({prefix + ".adam.m", spec_hash, opt.m});
  out.push_back({prefix + ".adam.v", spec_hash, opt.v});
}

const CheckpointRecord& find_record(const std::vector<CheckpointRecord>& records,
                                    const std::string& name) {
  for (const auto& r : records)
    if (r.name == name) return r;
  throw Error(ErrorCode::VersionMismatch, "checkpoint lacks record " + name);
}

void restore_records(const std::vector<CheckpointRecord>& records, const std::string& prefix,
                     ParameterSet& params) {
  const auto& r = find_record(records, prefix + ".params");
  if (r.spec_hash != params.spec.hash() || r.values.size() != params.spec.parameter_count())
    throw Error(ErrorCode::VersionMismatch, "checkpoint spec differs for " + prefix);
  params.values = r.values;
}

void restore_records(const std::vector<CheckpointRecord>& records, const std::string& prefix,
                     AdamState& opt, std::uint64_t spec_hash) {
  const auto& s = find_record(records, prefix + ".adam.scalars");
  const auto& m = find_record(records, prefix + ".adam.m");
  const auto& v = find_record(records, prefix + ".adam.v");
  if (s.spec_hash != spec_hash || m.spec_hash != spec_hash || v.spec_hash != spec_hash ||
      s.values.size() != 5 || m.values.size() != v.values.size())
    throw Error(ErrorCode::VersionMismatch, "optimizer state does not match " + prefix);
  opt.learning_rate = s.values[0];
  opt.beta1 = s.values[1];
  opt.beta2 = s.values[2];
  opt.epsilon = s.values[3];
  opt.step = static_cast<std::int64_t>(s.values[4]);
  opt.m = m.values;
  opt.v = v.values;
}

void save_checkpoint(const std::string& path, const ParameterSet& params, const AdamState& opt) {
  std::vector<CheckpointRecord> recs;
  append_records(recs, "net", params);
  append_records(recs, "net", opt, params.spec.hash());
  save_checkpoint(path, recs);
}

void load_checkpoint(const std::string& path, ParameterSet& params, AdamState& opt) {
  const auto recs = load_checkpoint(path);
  ParameterSet p = params;
  AdamState o = opt;
  restore_records(recs, "net", p);
  restore_records(recs, "net", o, params.spec.hash());
  if (o.m.size() != p.values.size())
    throw Error(ErrorCode::VersionMismatch, "optimizer moments do not match parameters");
  params = std::move(p);
  opt = std::move(o);
}

}  // namespace omtree
