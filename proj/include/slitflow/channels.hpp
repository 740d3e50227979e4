#pragma once

#include <vector>

#include "slitflow/wavemode.hpp"

namespace slitflow {

/// The three velocity channels of one slit: the convective (phase
/// gradient) channel and the two diffusive channels to the right and
/// left of the mean path.
enum class ChannelKind { Convective, DiffusiveRight, DiffusiveLeft };

/// Phase angle of a channel relative to the slit phase S/hbar, in exact
/// quarter turns: Convective 0, DiffusiveRight +1 (+pi/2),
/// DiffusiveLeft -1 (-pi/2).  Kept as an integer so that same-slit
/// cancellations and the i == j case stay exact in floating point.
int quarter_turns(ChannelKind kind);

/// One velocity channel.  All evaluators are pure functions of (x,t),
/// backed by the slit's wave mode.
struct Channel {
  ChannelKind kind;
  int slit_index;
  const WaveMode* mode;  // owned by the ChannelSet

  /// Channel velocity w_i.  Convective: dS/dx / m.  DiffusiveRight:
  /// -(hbar/m) (dR/dx)/R; DiffusiveLeft its exact negation.
  double velocity(double x, double t) const;
  /// Channel amplitude R(w_i) >= 0: the mode amplitude for the
  /// convective channel, half of it for each diffusive channel.
  double amplitude(double x, double t) const;
  /// Phase angle theta_i = S/hbar + quarter_turns * pi/2 (radians).
  double phase_angle(double x, double t) const;
};

/// The 3n channels of an n-slit system, in slit order
/// (conv, diffR, diffL) per slit.  Immutable after construction.
class ChannelSet {
 public:
  /// Throws MismatchedParamsError if the modes disagree on hbar or mass,
  /// InvalidParameterError if the mode list is empty.
  explicit ChannelSet(std::vector<WaveMode> modes);

  int n_slits() const { return static_cast<int>(modes_.size()); }
  int size() const { return 3 * n_slits(); }
  const Channel& channel(int i) const { return channels_[i]; }
  const std::vector<Channel>& channels() const { return channels_; }
  const std::vector<WaveMode>& modes() const { return modes_; }
  const PhysicalParams& params() const { return modes_.front().params(); }

  /// cos(theta_i - theta_j) in [-1,1]; the phase difference is formed
  /// from the slit phases plus an exact quarter-turn table, so
  /// cos phi_ii == 1 and same-slit pair angles are exact.
  double phase_cosine(int i, int j, double x, double t) const;

  /// Conditional probability density P(w_i): the channel amplitude
  /// projected on the phase-weighted sum of all 3n amplitudes.  May be
  /// negative locally (it is a relational projection, not a bare
  /// probability); the sum over channels is a perfect square and >= 0.
  double conditional_probability(int i, double x, double t) const;

  /// Channel current J(w_i) = w_i P(w_i).
  double channel_current(int i, double x, double t) const;

 private:
  std::vector<WaveMode> modes_;
  std::vector<Channel> channels_;
};

/// Build the 3n channels of an n-slit system.
ChannelSet build_channels(std::vector<WaveMode> modes);

inline double phase_cosine(const ChannelSet& set, int i, int j, double x,
                           double t) {
  return set.phase_cosine(i, j, x, t);
}
inline double conditional_probability(const ChannelSet& set, int i, double x,
                                      double t) {
  return set.conditional_probability(i, x, t);
}
inline double channel_current(const ChannelSet& set, int i, double x,
                              double t) {
  return set.channel_current(i, x, t);
}

}  // namespace slitflow
