#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace densnet {

enum class Parity : int { even = 1, odd = -1 };

inline Parity operator*(Parity a, Parity b) {
  return static_cast<int>(a) * static_cast<int>(b) > 0 ? Parity::even : Parity::odd;
}

/// Parity of the spherical harmonic of degree l, (-1)^l.
inline Parity sh_parity(int l) { return l % 2 == 0 ? Parity::even : Parity::odd; }

/// An irreducible representation of O(3): angular momentum and parity.
struct Irrep {
  int l = 0;
  Parity parity = Parity::even;

  Irrep() = default;
  Irrep(int l_, Parity p);

  int dim() const { return 2 * l + 1; }
  bool is_scalar() const { return l == 0; }
  std::string str() const;

  friend bool operator==(const Irrep&, const Irrep&) = default;
  /// Ordered by l, then even before odd.
  friend std::strong_ordering operator<=>(const Irrep& a, const Irrep& b) {
    if (auto c = a.l <=> b.l; c != 0) return c;
    return static_cast<int>(b.parity) <=> static_cast<int>(a.parity);
  }
};

/// One channel: `mul` copies of `irrep`.
struct MulIrrep {
  int mul = 1;
  Irrep irrep;

  int dim() const { return mul * irrep.dim(); }
  friend bool operator==(const MulIrrep&, const MulIrrep&) = default;
};

struct ChannelSlice {
  std::size_t channel_index = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
  friend bool operator==(const ChannelSlice&, const ChannelSlice&) = default;
};

/// Ordered list of channels. The order defines the flat layout: channel by
/// channel, each channel storing `mul` contiguous blocks of 2l+1 components
/// with m running from -l to l.
class IrrepsSpec {
 public:
  IrrepsSpec() = default;
  explicit IrrepsSpec(std::vector<MulIrrep> channels);

  /// Parses `12x0e+5x1o`. Whitespace is tolerated around tokens.
  static IrrepsSpec parse(std::string_view text);

  const std::vector<MulIrrep>& channels() const { return channels_; }
  std::size_t size() const { return channels_.size(); }
  bool empty() const { return channels_.empty(); }
  const MulIrrep& operator[](std::size_t i) const { return channels_[i]; }
  auto begin() const { return channels_.begin(); }
  auto end() const { return channels_.end(); }

  int dim() const;
  int lmax() const;
  /// Total multiplicity over channels carrying exactly this irrep.
  int count(const Irrep& ir) const;
  bool contains(const Irrep& ir) const { return count(ir) > 0; }
  std::vector<ChannelSlice> slices() const;
  std::string str() const;

  friend bool operator==(const IrrepsSpec&, const IrrepsSpec&) = default;

 private:
  std::vector<MulIrrep> channels_;
};

IrrepsSpec parse_irreps(std::string_view text);
std::string format_irreps(const IrrepsSpec& spec);
inline int dim(const IrrepsSpec& spec) { return spec.dim(); }
inline std::vector<ChannelSlice> slices(const IrrepsSpec& spec) { return spec.slices(); }

/// Drops channels with l > lmax; survivors keep their order.
IrrepsSpec truncate_spec(const IrrepsSpec& spec, int lmax);

/// Irreps in a (x) b: every l in [|la-lb|, la+lb] with parity pa*pb.
std::vector<Irrep> tensor_selection(const Irrep& a, const Irrep& b);

/// Hidden layer irreps holding the total dimension fixed while migrating
/// scalar features into higher l. Starts from (5*base)x0e+(5*base)x0o; for
/// each l in 1..l_h, floor(base/(2l+1)) copies of (l,e) and (l,o) are
/// added and the same number of components is removed from each scalar
/// parity. Channels with zero copies are omitted.
IrrepsSpec hidden_config(int l_h, int base_scalar_mult);

}  // namespace densnet
