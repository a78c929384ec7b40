#include "hubbard_vqe/pauli.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace hvqe {
namespace {

constexpr complex_t kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

std::uint64_t mask_for(std::size_t n) {
  return n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
}

int letter_rank(std::uint64_t x, std::uint64_t z, std::size_t q) {
  const int xb = static_cast<int>((x >> q) & 1U);
  const int zb = static_cast<int>((z >> q) & 1U);
  // I=0, X=1, Y=2, Z=3
  return xb && zb ? 2 : (xb ? 1 : (zb ? 3 : 0));
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": qubit counts differ (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

struct SymplecticKey {
  std::uint64_t x, z;
  bool operator==(const SymplecticKey&) const = default;
};

struct SymplecticKeyHash {
  std::size_t operator()(const SymplecticKey& k) const noexcept {
    return std::hash<std::uint64_t>{}(k.x * 0x9e3779b97f4a7c15ULL ^ (k.z + 0x632be59bd9b4e019ULL));
  }
};

using Accumulator = std::unordered_map<SymplecticKey, complex_t, SymplecticKeyHash>;

std::vector<PauliTerm> drain(std::size_t n, Accumulator& acc) {
  std::vector<PauliTerm> out;
  out.reserve(acc.size());
  for (const auto& [key, c] : acc) {
    if (std::abs(c) >= PauliSum::kDropTolerance) out.push_back({PauliString(n, key.x, key.z), c});
  }
  std::sort(out.begin(), out.end(),
            [](const PauliTerm& a, const PauliTerm& b) { return a.string < b.string; });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PauliString

PauliString::PauliString(std::size_t n_qubits) : PauliString(n_qubits, 0, 0) {}

PauliString::PauliString(std::size_t n_qubits, std::uint64_t x, std::uint64_t z)
    : n_(n_qubits), x_(x), z_(z) {
  if (n_qubits == 0 || n_qubits > kMaxQubits) {
    throw DimensionError("Pauli string needs 1.." + std::to_string(kMaxQubits) + " qubits");
  }
  if (((x | z) & ~mask_for(n_qubits)) != 0) throw DimensionError("Pauli bits beyond register");
}

PauliString PauliString::from_letters(std::string_view letters) {
  PauliString p(letters.size());
  for (std::size_t i = 0; i < letters.size(); ++i) {
    p.set_letter(letters.size() - 1 - i, letters[i]);
  }
  return p;
}

PauliString PauliString::single(std::size_t n_qubits, std::size_t qubit, char letter) {
  PauliString p(n_qubits);
  p.set_letter(qubit, letter);
  return p;
}

char PauliString::letter(std::size_t qubit) const {
  if (qubit >= n_) throw DimensionError("qubit index out of range");
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  return kLetters[letter_rank(x_, z_, qubit)];
}

void PauliString::set_letter(std::size_t qubit, char letter) {
  if (qubit >= n_) throw DimensionError("qubit index out of range");
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  x_ &= ~bit;
  z_ &= ~bit;
  switch (letter) {
    case 'I': break;
    case 'X': x_ |= bit; break;
    case 'Y': x_ |= bit; z_ |= bit; break;
    case 'Z': z_ |= bit; break;
    default: throw DomainError(std::string("invalid Pauli letter '") + letter + "'");
  }
}

std::size_t PauliString::weight() const { return std::popcount(x_ | z_); }

std::string PauliString::to_string() const {
  std::string s(n_, 'I');
  for (std::size_t q = 0; q < n_; ++q) s[n_ - 1 - q] = letter(q);
  return s;
}

std::strong_ordering PauliString::operator<=>(const PauliString& other) const {
  if (auto c = n_ <=> other.n_; c != 0) return c;
  const std::uint64_t diff = (x_ ^ other.x_) | (z_ ^ other.z_);
  if (diff == 0) return std::strong_ordering::equal;
  const auto q = static_cast<std::size_t>(63 - std::countl_zero(diff));
  return letter_rank(x_, z_, q) <=> letter_rank(other.x_, other.z_, q);
}

std::size_t PauliStringHash::operator()(const PauliString& p) const noexcept {
  return SymplecticKeyHash{}({p.x_bits(), p.z_bits()}) ^ p.n_qubits();
}

PauliProduct multiply(const PauliString& a, const PauliString& b) {
  require_same_size(a.n_qubits(), b.n_qubits(), "multiply");
  const std::uint64_t ax = a.x_bits() & ~a.z_bits(), ay = a.x_bits() & a.z_bits(),
                      az = ~a.x_bits() & a.z_bits();
  const std::uint64_t bx = b.x_bits() & ~b.z_bits(), by = b.x_bits() & b.z_bits(),
                      bz = ~b.x_bits() & b.z_bits();
  // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
  const std::uint64_t plus = (ax & by) | (ay & bz) | (az & bx);
  const std::uint64_t minus = (ay & bx) | (az & by) | (ax & bz);
  const int exponent = (std::popcount(plus) - std::popcount(minus)) & 3;
  return {kPhases[exponent],
          PauliString(a.n_qubits(), a.x_bits() ^ b.x_bits(), a.z_bits() ^ b.z_bits())};
}

bool commutes(const PauliString& a, const PauliString& b) {
  require_same_size(a.n_qubits(), b.n_qubits(), "commutes");
  return (std::popcount((a.x_bits() & b.z_bits()) ^ (a.z_bits() & b.x_bits())) & 1) == 0;
}

double diagonal_value(const PauliString& diagonal, std::uint64_t basis_index) {
  if (!diagonal.is_diagonal()) throw DomainError("diagonal_value needs an I/Z string");
  return (std::popcount(diagonal.z_bits() & basis_index) & 1) ? -1.0 : 1.0;
}

// ---------------------------------------------------------------------------
// PauliSum

PauliSum::PauliSum(std::size_t n_qubits, std::vector<PauliTerm> terms)
    : n_(n_qubits), terms_(std::move(terms)) {
  for (const auto& t : terms_) require_same_size(n_, t.string.n_qubits(), "PauliSum");
  canonicalize();
}

PauliSum::PauliSum(const PauliString& p, complex_t coeff) : n_(p.n_qubits()) {
  if (std::abs(coeff) >= kDropTolerance) terms_.push_back({p, coeff});
}

PauliSum PauliSum::identity(std::size_t n_qubits, complex_t coeff) {
  return PauliSum(PauliString(n_qubits), coeff);
}

void PauliSum::canonicalize() {
  Accumulator acc;
  acc.reserve(terms_.size());
  for (const auto& t : terms_) acc[{t.string.x_bits(), t.string.z_bits()}] += t.coeff;
  terms_ = drain(n_, acc);
}

complex_t PauliSum::coefficient(const PauliString& p) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), p,
                             [](const PauliTerm& t, const PauliString& s) { return t.string < s; });
  return (it != terms_.end() && it->string == p) ? it->coeff : complex_t{0.0, 0.0};
}

bool PauliSum::is_hermitian() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const PauliTerm& t) { return std::abs(t.coeff.imag()) < kDropTolerance; });
}

bool PauliSum::is_diagonal() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const PauliTerm& t) { return t.string.is_diagonal(); });
}

PauliSum PauliSum::adjoint() const {
  PauliSum out = *this;
  for (auto& t : out.terms_) t.coeff = std::conj(t.coeff);
  return out;
}

PauliSum PauliSum::hermitian_part_checked(double tol) const {
  PauliSum out(n_);
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (std::abs(t.coeff.imag()) > tol) {
      throw NumericalError("operator is not Hermitian: term " + t.string.to_string() +
                           " has imaginary coefficient " + std::to_string(t.coeff.imag()));
    }
    if (std::abs(t.coeff.real()) >= kDropTolerance) out.terms_.push_back({t.string, t.coeff.real()});
  }
  return out;
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (n_ == 0) n_ = other.n_;
  require_same_size(n_, other.n_, "PauliSum +");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  canonicalize();
  return *this;
}

PauliSum& PauliSum::operator-=(const PauliSum& other) { return *this += other * complex_t{-1.0}; }

PauliSum& PauliSum::operator*=(complex_t scalar) {
  for (auto& t : terms_) t.coeff *= scalar;
  std::erase_if(terms_, [](const PauliTerm& t) { return std::abs(t.coeff) < kDropTolerance; });
  return *this;
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) { return sum_product(a, b); }

double PauliSum::diagonal_value(std::uint64_t basis_index) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.coeff.real() * hvqe::diagonal_value(t.string, basis_index);
  return v;
}

Eigen::MatrixXcd PauliSum::to_dense() const {
  if (n_ > 12) throw DimensionError("dense matrices limited to 12 qubits");
  const std::size_t dim = std::size_t{1} << n_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : terms_) {
    const std::uint64_t x = t.string.x_bits(), z = t.string.z_bits();
    const complex_t base = t.coeff * kPhases[std::popcount(x & z) & 3];
    for (std::uint64_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(b & z) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b)) += base * sign;
    }
  }
  return m;
}

std::vector<complex_t> PauliSum::apply(std::span<const complex_t> amplitudes) const {
  const std::size_t dim = std::size_t{1} << n_;
  if (amplitudes.size() != dim) throw DimensionError("apply: state size mismatch");
  std::vector<complex_t> out(dim, complex_t{0.0, 0.0});
  for (const auto& t : terms_) {
    const std::uint64_t x = t.string.x_bits(), z = t.string.z_bits();
    const complex_t base = t.coeff * kPhases[std::popcount(x & z) & 3];
    for (std::uint64_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(b & z) & 1) ? -1.0 : 1.0;
      out[b ^ x] += base * sign * amplitudes[b];
    }
  }
  return out;
}

std::string PauliSum::to_text() const {
  std::string out = "# pauli-sum n_qubits=" + std::to_string(n_) + "\n";
  char buf[64];
  for (const auto& t : terms_) {
    std::snprintf(buf, sizeof buf, "%.17g ", t.coeff.real());
    out += buf;
    std::snprintf(buf, sizeof buf, "%.17g ", t.coeff.imag());
    out += buf;
    out += t.string.to_string();
    out += '\n';
  }
  return out;
}

PauliSum PauliSum::from_text(std::string_view text) {
  std::size_t n = 0;
  std::vector<PauliTerm> terms;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("n_qubits=");
      if (pos != std::string::npos) n = std::stoul(line.substr(pos + 9));
      continue;
    }
    std::istringstream fields(line);
    std::string re, im, letters;
    if (!(fields >> re >> im >> letters)) {
      throw ConfigError("line " + std::to_string(line_no), "expected '<re> <im> <letters>'");
    }
    auto p = PauliString::from_letters(letters);
    if (n == 0) n = p.n_qubits();
    terms.push_back({p, complex_t{std::stod(re), std::stod(im)}});
  }
  if (n == 0) throw ConfigError("", "empty operator text without n_qubits header");
  return PauliSum(n, std::move(terms));
}

bool PauliSum::operator==(const PauliSum& other) const {
  if (n_ != other.n_ || terms_.size() != other.terms_.size()) return false;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!(terms_[i].string == other.terms_[i].string) || terms_[i].coeff != other.terms_[i].coeff) {
      return false;
    }
  }
  return true;
}

PauliSum sum_product(const PauliSum& a, const PauliSum& b) {
  require_same_size(a.n_qubits(), b.n_qubits(), "sum_product");
  Accumulator acc;
  acc.reserve(a.size() * b.size());
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      auto [phase, p] = multiply(ta.string, tb.string);
      acc[{p.x_bits(), p.z_bits()}] += phase * ta.coeff * tb.coeff;
    }
  }
  return PauliSum(a.n_qubits(), drain(a.n_qubits(), acc));
}

complex_t expectation(const PauliSum& op, const Statevector& psi) {
  if (op.n_qubits() != psi.n_qubits()) throw DimensionError("expectation: qubit counts differ");
  if (std::abs(psi.norm() - 1.0) > Statevector::kNormTolerance) {
    throw DomainError("expectation: state is not normalized");
  }
  const auto amps = psi.amplitudes();
  complex_t total = 0.0;
  for (const auto& t : op.terms()) {
    const std::uint64_t x = t.string.x_bits(), z = t.string.z_bits();
    complex_t s = 0.0;
    for (std::uint64_t b = 0; b < amps.size(); ++b) {
      const double sign = (std::popcount(b & z) & 1) ? -1.0 : 1.0;
      s += std::conj(amps[b ^ x]) * amps[b] * sign;
    }
    total += t.coeff * kPhases[std::popcount(x & z) & 3] * s;
  }
  if (std::abs(total.imag()) < 1e-12) total.imag(0.0);
  return total;
}

double real_expectation(const PauliSum& op, const Statevector& psi) {
  if (!op.is_hermitian()) throw DomainError("real_expectation needs a Hermitian operator");
  return expectation(op, psi).real();
}

}  // namespace hvqe
