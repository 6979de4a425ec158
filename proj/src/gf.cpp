#include "acc/gf.hpp"

#include <algorithm>
#include <random>

namespace acc::gf {

GaloisField::GaloisField(int order) : order_(order) {
  if (order == 256) {
    bits_ = 8;
    poly_ = 0x11B;
  } else if (order == 65536) {
    bits_ = 16;
    poly_ = 0x1100B;
  } else {
    throw std::invalid_argument("unsupported field order " + std::to_string(order));
  }
  const auto n = static_cast<std::size_t>(order);
  log_.assign(n, 0);
  exp_.assign(2 * n, 0);
  // First element whose powers reach every nonzero element.
  for (Elem g = 2; g < static_cast<Elem>(order); ++g) {
    Elem x = 1;
    std::size_t period = 0;
    do {
      x = slow_mul(x, g);
      ++period;
    } while (x != 1 && period < n);
    if (period == n - 1) {
      generator_ = g;
      break;
    }
  }
  if (generator_ == 0) throw std::logic_error("no primitive element found");
  Elem x = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    exp_[k] = x;
    exp_[k + n - 1] = x;
    log_[x] = static_cast<std::uint32_t>(k);
    x = slow_mul(x, generator_);
  }
}

const GaloisField& GaloisField::get(int order) {
  static const GaloisField f8(256);
  static const GaloisField f16(65536);
  if (order == 256) return f8;
  if (order == 65536) return f16;
  throw std::invalid_argument("unsupported field order " + std::to_string(order));
}

Elem GaloisField::slow_mul(Elem a, Elem b) const {
  Elem result = 0;
  while (b != 0) {
    if (b & 1u) result ^= a;
    b >>= 1;
    a <<= 1;
    if (a & static_cast<Elem>(order_)) a ^= poly_;
  }
  return result;
}

Elem GaloisField::inv(Elem a) const {
  if (a == 0) throw std::domain_error("zero has no inverse");
  return exp_[static_cast<std::size_t>(order_ - 1) - log_[a]];
}

GfMatrix GfMatrix::identity(int n) {
  GfMatrix m(n, n);
  for (int k = 0; k < n; ++k) m.at(k, k) = 1;
  return m;
}

GfMatrix multiply(const GaloisField& field, const GfMatrix& a, const GfMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("dimension mismatch");
  GfMatrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const Elem s = a.at(i, k);
      if (s == 0) continue;
      for (int j = 0; j < b.cols(); ++j) out.at(i, j) ^= field.mul(s, b.at(k, j));
    }
  }
  return out;
}

namespace {

// Reduces [m | aug] to row echelon form in place; returns the rank of m.
int eliminate(const GaloisField& field, GfMatrix& m, GfMatrix* aug) {
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int pivot = -1;
    for (int r = row; r < m.rows(); ++r) {
      if (m.at(r, col) != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    auto swap_rows = [](GfMatrix& x, int a, int b) {
      for (int c = 0; c < x.cols(); ++c) std::swap(x.at(a, c), x.at(b, c));
    };
    swap_rows(m, row, pivot);
    if (aug) swap_rows(*aug, row, pivot);
    const Elem scale = field.inv(m.at(row, col));
    for (int c = 0; c < m.cols(); ++c) m.at(row, c) = field.mul(m.at(row, c), scale);
    if (aug) {
      for (int c = 0; c < aug->cols(); ++c) aug->at(row, c) = field.mul(aug->at(row, c), scale);
    }
    for (int r = 0; r < m.rows(); ++r) {
      if (r == row) continue;
      const Elem f = m.at(r, col);
      if (f == 0) continue;
      for (int c = 0; c < m.cols(); ++c) m.at(r, c) ^= field.mul(f, m.at(row, c));
      if (aug) {
        for (int c = 0; c < aug->cols(); ++c) aug->at(r, c) ^= field.mul(f, aug->at(row, c));
      }
    }
    ++row;
  }
  return row;
}

}  // namespace

int rank(const GaloisField& field, GfMatrix m) { return eliminate(field, m, nullptr); }

std::optional<GfMatrix> invert(const GaloisField& field, const GfMatrix& m) {
  if (m.rows() != m.cols()) return std::nullopt;
  return solve(field, m, GfMatrix::identity(m.rows()));
}

std::optional<GfMatrix> solve(const GaloisField& field, const GfMatrix& m, const GfMatrix& b) {
  if (m.rows() != m.cols() || b.rows() != m.rows()) {
    throw std::invalid_argument("solve needs a square system");
  }
  GfMatrix work = m;
  GfMatrix rhs = b;
  if (eliminate(field, work, &rhs) < m.rows()) return std::nullopt;
  return rhs;
}

Library::Library(int N, int F, int r, int subfile_bytes, int field_order, std::uint64_t seed)
    : r_(r) {
  int slice = (subfile_bytes + r - 1) / r;
  if (field_order == 65536 && slice % 2 != 0) ++slice;
  packet_bytes_ = slice;
  std::mt19937_64 rng(seed);
  for (int n = 1; n <= N; ++n) {
    for (int f = 1; f <= F; ++f) {
      std::vector<std::uint8_t> bytes(static_cast<std::size_t>(subfile_bytes));
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng() & 0xFFu);
      subfiles_[{n, f}] = std::move(bytes);
    }
  }
}

const std::vector<std::uint8_t>& Library::subfile(SubfileId id) const {
  return subfiles_.at(id);
}

std::vector<std::uint8_t> Library::packet(const PacketId& id) const {
  const auto& whole = subfile(id.subfile);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(packet_bytes_), 0);
  const std::size_t begin = static_cast<std::size_t>((id.piece - 1) * packet_bytes_);
  for (std::size_t k = 0; k < out.size() && begin + k < whole.size(); ++k) out[k] = whole[begin + k];
  return out;
}

std::vector<Elem> to_elements(const GaloisField& field, const std::vector<std::uint8_t>& bytes) {
  std::vector<Elem> out;
  if (field.bits() == 8) {
    out.assign(bytes.begin(), bytes.end());
    return out;
  }
  for (std::size_t k = 0; k < bytes.size(); k += 2) {
    const Elem lo = k + 1 < bytes.size() ? bytes[k + 1] : 0;
    out.push_back(static_cast<Elem>(bytes[k]) << 8 | lo);
  }
  return out;
}

std::vector<std::uint8_t> from_elements(const GaloisField& field, const std::vector<Elem>& elems) {
  std::vector<std::uint8_t> out;
  for (Elem e : elems) {
    if (field.bits() == 16) out.push_back(static_cast<std::uint8_t>(e >> 8));
    out.push_back(static_cast<std::uint8_t>(e & 0xFFu));
  }
  return out;
}

std::vector<std::uint8_t> encode_payload(const GaloisField& field, const std::vector<CodedTerm>& terms,
                                         const Library& library) {
  std::vector<Elem> acc(to_elements(field, std::vector<std::uint8_t>(
                                                static_cast<std::size_t>(library.packet_bytes()), 0))
                            .size(),
                        0);
  for (const auto& t : terms) {
    const auto elems = to_elements(field, library.packet(t.packet));
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] ^= field.mul(t.coef, elems[k]);
  }
  return from_elements(field, acc);
}

std::vector<std::pair<int, int>> decoding_columns(const Instance& instance, int user) {
  std::vector<std::pair<int, int>> cols;
  for (int f : missing_set(instance, user)) {
    for (int j = 1; j <= instance.config.r; ++j) cols.emplace_back(f, j);
  }
  return cols;
}

GfMatrix build_decoding_matrix(const Instance& instance, int user,
                               const std::vector<CodedPacket>& log,
                               const std::vector<int>& equations) {
  const auto cols = decoding_columns(instance, user);
  if (equations.size() != cols.size()) {
    throw ContractError("user " + std::to_string(user) + " has " +
                        std::to_string(equations.size()) + " equations for " +
                        std::to_string(cols.size()) + " missing packets");
  }
  std::map<std::pair<int, int>, int> col_of;
  for (std::size_t c = 0; c < cols.size(); ++c) col_of[cols[c]] = static_cast<int>(c);
  const int n = static_cast<int>(cols.size());
  GfMatrix b(n, n);
  for (int row = 0; row < n; ++row) {
    const auto& pkt = log.at(static_cast<std::size_t>(equations[static_cast<std::size_t>(row)]));
    for (const auto& t : pkt.terms) {
      if (t.user != user) continue;
      auto it = col_of.find({t.packet.subfile.part, t.packet.piece});
      if (it != col_of.end()) b.at(row, it->second) = t.coef;
    }
  }
  return b;
}

std::vector<std::vector<std::uint8_t>> decode_payload(const GaloisField& field,
                                                      const Instance& instance, int user,
                                                      const std::vector<CodedPacket>& log,
                                                      const std::vector<int>& equations,
                                                      const Library& library) {
  const GfMatrix b = build_decoding_matrix(instance, user, log, equations);
  const int n = b.rows();
  const int width = static_cast<int>(to_elements(field, std::vector<std::uint8_t>(
                                                            static_cast<std::size_t>(library.packet_bytes()), 0))
                                         .size());
  GfMatrix rhs(n, width);
  for (int row = 0; row < n; ++row) {
    const auto& pkt = log.at(static_cast<std::size_t>(equations[static_cast<std::size_t>(row)]));
    auto elems = to_elements(field, pkt.payload);
    for (const auto& t : pkt.terms) {
      if (t.user == user) continue;
      if (!instance.placement.contains(user, t.packet.subfile)) {
        throw ContractError("equation term is neither cached nor wanted by the user");
      }
      const auto known = to_elements(field, library.packet(t.packet));
      for (int c = 0; c < width; ++c) {
        elems[static_cast<std::size_t>(c)] ^= field.mul(t.coef, known[static_cast<std::size_t>(c)]);
      }
    }
    for (int c = 0; c < width; ++c) rhs.at(row, c) = elems[static_cast<std::size_t>(c)];
  }
  const auto x = solve(field, b, rhs);
  if (!x) throw DecodeFailure("decoding matrix of user " + std::to_string(user) + " is singular");
  std::vector<std::vector<std::uint8_t>> out;
  for (int row = 0; row < n; ++row) {
    std::vector<Elem> elems(static_cast<std::size_t>(width));
    for (int c = 0; c < width; ++c) elems[static_cast<std::size_t>(c)] = x->at(row, c);
    out.push_back(from_elements(field, elems));
  }
  return out;
}

}  // namespace acc::gf
