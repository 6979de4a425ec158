#pragma once

// Arithmetic in GF(2^8) (reduction 0x11B) and GF(2^16) (reduction 0x1100B),
// Gaussian elimination over those fields, and the byte-level encode/decode
// of random-linear coded packets.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "acc/model.hpp"

namespace acc::gf {

using Elem = std::uint32_t;

class GaloisField {
 public:
  explicit GaloisField(int order);
  // Shared immutable instances for 256 and 65536.
  static const GaloisField& get(int order);

  int order() const { return order_; }
  int bits() const { return bits_; }
  Elem add(Elem a, Elem b) const { return a ^ b; }
  Elem mul(Elem a, Elem b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[static_cast<std::size_t>(log_[a]) + static_cast<std::size_t>(log_[b])];
  }
  // Throws std::domain_error for zero.
  Elem inv(Elem a) const;
  Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }
  Elem generator() const { return generator_; }

  // Carry-less multiply reduced by the field polynomial, without tables.
  Elem slow_mul(Elem a, Elem b) const;

 private:
  int order_;
  int bits_;
  std::uint32_t poly_;
  Elem generator_ = 0;
  std::vector<std::uint32_t> log_;
  std::vector<Elem> exp_;  // doubled so mul needs no modulo
};

class GfMatrix {
 public:
  GfMatrix() = default;
  GfMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), 0) {}
  static GfMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Elem& at(int r, int c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  Elem at(int r, int c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  bool operator==(const GfMatrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Elem> data_;
};

GfMatrix multiply(const GaloisField& field, const GfMatrix& a, const GfMatrix& b);
int rank(const GaloisField& field, GfMatrix m);
// nullopt when singular or not square.
std::optional<GfMatrix> invert(const GaloisField& field, const GfMatrix& m);
// Solves M X = B for square M; nullopt when M is singular.
std::optional<GfMatrix> solve(const GaloisField& field, const GfMatrix& m, const GfMatrix& b);

class DecodeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Deterministic subfile contents. A subfile of `subfile_bytes` bytes is cut
// into r slices of equal length (zero padded; even length for GF(2^16)).
class Library {
 public:
  Library(int N, int F, int r, int subfile_bytes, int field_order, std::uint64_t seed);

  int packet_bytes() const { return packet_bytes_; }
  const std::vector<std::uint8_t>& subfile(SubfileId id) const;
  std::vector<std::uint8_t> packet(const PacketId& id) const;
  int r() const { return r_; }

 private:
  int r_;
  int packet_bytes_;
  std::map<SubfileId, std::vector<std::uint8_t>> subfiles_;
};

struct CodedTerm {
  int user = 1;
  PacketId packet;
  Elem coef = 0;
};

struct CodedPacket {
  int tau = 0;
  UserGroup group;
  std::vector<CodedTerm> terms;
  std::vector<std::uint8_t> payload;
};

// Packets are byte strings read as field-element vectors (bytes for
// GF(2^8), big-endian byte pairs for GF(2^16)).
std::vector<Elem> to_elements(const GaloisField& field, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> from_elements(const GaloisField& field, const std::vector<Elem>& elems);

// Coefficient-weighted field sum of the referenced packets.
std::vector<std::uint8_t> encode_payload(const GaloisField& field, const std::vector<CodedTerm>& terms,
                                         const Library& library);

// Missing packets (f, j) of `user`, ordered by part then piece; these index
// the decoding matrix columns.
std::vector<std::pair<int, int>> decoding_columns(const Instance& instance, int user);

// Rows are the packets whose indices are listed in `equations`, columns the
// user's missing packets. Throws ContractError unless the row count is
// r |Omega|.
GfMatrix build_decoding_matrix(const Instance& instance, int user,
                               const std::vector<CodedPacket>& log,
                               const std::vector<int>& equations);

// Strips cached contributions from each listed payload and solves for the
// user's missing packets (in decoding_columns order). Throws DecodeFailure
// when the decoding matrix is singular.
std::vector<std::vector<std::uint8_t>> decode_payload(const GaloisField& field,
                                                      const Instance& instance, int user,
                                                      const std::vector<CodedPacket>& log,
                                                      const std::vector<int>& equations,
                                                      const Library& library);

}  // namespace acc::gf
