#include "densnet/irreps.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "densnet/error.hpp"

namespace densnet {

Irrep::Irrep(int l_, Parity p) : l(l_), parity(p) {
  if (l_ < 0) throw Error("irrep: negative l " + std::to_string(l_));
}

std::string Irrep::str() const {
  return std::to_string(l) + (parity == Parity::even ? "e" : "o");
}

IrrepsSpec::IrrepsSpec(std::vector<MulIrrep> channels) : channels_(std::move(channels)) {
  for (const auto& c : channels_) {
    if (c.mul < 1) throw Error("irreps: multiplicity must be >= 1, got " + std::to_string(c.mul));
    if (c.irrep.l < 0) throw Error("irreps: negative l");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

MulIrrep parse_term(std::string_view raw) {
  const std::string_view term = trim(raw);
  const auto bad = [&](const std::string& why) {
    return Error("irreps: malformed term '" + std::string(term) + "': " + why);
  };
  const auto x = term.find('x');
  if (x == std::string_view::npos) throw bad("missing 'x'");
  const std::string_view mul_txt = trim(term.substr(0, x));
  std::string_view rest = trim(term.substr(x + 1));
  if (rest.empty()) throw bad("missing irrep");
  const char par = rest.back();
  if (par != 'e' && par != 'o') throw bad("parity must be 'e' or 'o'");
  const std::string_view l_txt = trim(rest.substr(0, rest.size() - 1));

  int mul = 0;
  if (!parse_int(mul_txt, mul)) throw bad("bad multiplicity");
  if (mul == 0) throw bad("zero multiplicity");
  if (mul < 0) throw bad("negative multiplicity");
  int l = 0;
  if (!parse_int(l_txt, l)) throw bad("bad l");
  if (l < 0) throw bad("negative l");
  return MulIrrep{mul, Irrep(l, par == 'e' ? Parity::even : Parity::odd)};
}

}  // namespace

IrrepsSpec IrrepsSpec::parse(std::string_view text) {
  if (trim(text).empty()) throw Error("irreps: empty specification");
  std::vector<MulIrrep> channels;
  std::size_t start = 0;
  while (true) {
    const auto plus = text.find('+', start);
    const auto piece = text.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start);
    channels.push_back(parse_term(piece));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return IrrepsSpec(std::move(channels));
}

int IrrepsSpec::dim() const {
  int d = 0;
  for (const auto& c : channels_) d += c.dim();
  return d;
}

int IrrepsSpec::lmax() const {
  int l = -1;
  for (const auto& c : channels_) l = std::max(l, c.irrep.l);
  return l;
}

int IrrepsSpec::count(const Irrep& ir) const {
  int n = 0;
  for (const auto& c : channels_)
    if (c.irrep == ir) n += c.mul;
  return n;
}

std::vector<ChannelSlice> IrrepsSpec::slices() const {
  std::vector<ChannelSlice> out;
  out.reserve(channels_.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto len = static_cast<std::size_t>(channels_[i].dim());
    out.push_back({i, offset, len});
    offset += len;
  }
  return out;
}

std::string IrrepsSpec::str() const {
  std::string s;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (i) s += '+';
    s += std::to_string(channels_[i].mul) + "x" + channels_[i].irrep.str();
  }
  return s;
}

IrrepsSpec parse_irreps(std::string_view text) { return IrrepsSpec::parse(text); }

std::string format_irreps(const IrrepsSpec& spec) { return spec.str(); }

IrrepsSpec truncate_spec(const IrrepsSpec& spec, int lmax) {
  if (lmax < 0) throw Error("truncate_spec: lmax must be >= 0");
  std::vector<MulIrrep> kept;
  for (const auto& c : spec)
    if (c.irrep.l <= lmax) kept.push_back(c);
  if (kept.empty()) throw Error("truncate_spec: no channels survive lmax=" + std::to_string(lmax));
  return IrrepsSpec(std::move(kept));
}

std::vector<Irrep> tensor_selection(const Irrep& a, const Irrep& b) {
  std::vector<Irrep> out;
  const Parity p = a.parity * b.parity;
  for (int l = std::abs(a.l - b.l); l <= a.l + b.l; ++l) out.emplace_back(l, p);
  return out;
}

IrrepsSpec hidden_config(int l_h, int base_scalar_mult) {
  if (l_h < 0) throw Error("hidden_config: l_h must be >= 0");
  if (base_scalar_mult < 1) throw Error("hidden_config: base scalar multiplicity must be >= 1");
  int scalars = 5 * base_scalar_mult;
  std::vector<MulIrrep> higher;
  for (int l = 1; l <= l_h; ++l) {
    const int copies = base_scalar_mult / (2 * l + 1);
    scalars -= copies * (2 * l + 1);
    if (scalars < 1)
      throw Error("hidden_config: scalar multiplicity exhausted at l=" + std::to_string(l));
    if (copies == 0) continue;
    higher.push_back({copies, Irrep(l, Parity::even)});
    higher.push_back({copies, Irrep(l, Parity::odd)});
  }
  std::vector<MulIrrep> channels{{scalars, Irrep(0, Parity::even)}, {scalars, Irrep(0, Parity::odd)}};
  channels.insert(channels.end(), higher.begin(), higher.end());
  return IrrepsSpec(std::move(channels));
}

}  // namespace densnet
