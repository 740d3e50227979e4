#include "slitflow/channels.hpp"

#include <cmath>
#include <string>

#include "slitflow/errors.hpp"

namespace slitflow {

int quarter_turns(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Convective:
      return 0;
    case ChannelKind::DiffusiveRight:
      return 1;
    case ChannelKind::DiffusiveLeft:
      return -1;
  }
  return 0;
}

double Channel::velocity(double x, double t) const {
  const ModeSample ms = mode->eval(x, t);
  const PhysicalParams& p = mode->params();
  switch (kind) {
    case ChannelKind::Convective:
      return ms.ds_dx / p.mass;
    case ChannelKind::DiffusiveRight:
      return -(p.hbar / p.mass) * ms.dlogr_dx;
    case ChannelKind::DiffusiveLeft:
      return (p.hbar / p.mass) * ms.dlogr_dx;
  }
  return 0.0;
}

double Channel::amplitude(double x, double t) const {
  const double r = mode->eval(x, t).r();
  return kind == ChannelKind::Convective ? r : 0.5 * r;
}

double Channel::phase_angle(double x, double t) const {
  const double base = mode->eval(x, t).s / mode->params().hbar;
  return base + quarter_turns(kind) * (M_PI / 2.0);
}

ChannelSet::ChannelSet(std::vector<WaveMode> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) {
    throw InvalidParameterError("a channel set needs at least one mode");
  }
  const PhysicalParams& ref = modes_.front().params();
  for (const WaveMode& m : modes_) {
    if (!m.params().same_as(ref)) {
      throw MismatchedParamsError(
          "all modes of a channel set must share hbar and mass exactly");
    }
  }
  channels_.reserve(3 * modes_.size());
  for (int k = 0; k < static_cast<int>(modes_.size()); ++k) {
    channels_.push_back({ChannelKind::Convective, k, &modes_[k]});
    channels_.push_back({ChannelKind::DiffusiveRight, k, &modes_[k]});
    channels_.push_back({ChannelKind::DiffusiveLeft, k, &modes_[k]});
  }
}

namespace {

// cos(delta + q * pi/2), with the quarter turn applied exactly.
double quarter_cos(double delta, int q) {
  switch (((q % 4) + 4) % 4) {
    case 0:
      return std::cos(delta);
    case 1:
      return -std::sin(delta);
    case 2:
      return -std::cos(delta);
    default:
      return std::sin(delta);
  }
}

}  // namespace

double ChannelSet::phase_cosine(int i, int j, double x, double t) const {
  const Channel& ci = channels_[i];
  const Channel& cj = channels_[j];
  const double hbar = params().hbar;
  const double si = ci.mode->eval(x, t).s;
  const double sj = cj.mode->eval(x, t).s;
  const double delta = (si - sj) / hbar;
  return quarter_cos(delta, quarter_turns(ci.kind) - quarter_turns(cj.kind));
}

double ChannelSet::conditional_probability(int i, double x, double t) const {
  const Channel& ci = channels_[i];
  double sum = 0.0;
  for (int j = 0; j < size(); ++j) {
    sum += channels_[j].amplitude(x, t) * phase_cosine(i, j, x, t);
  }
  return ci.amplitude(x, t) * sum;
}

double ChannelSet::channel_current(int i, double x, double t) const {
  return channels_[i].velocity(x, t) * conditional_probability(i, x, t);
}

ChannelSet build_channels(std::vector<WaveMode> modes) {
  return ChannelSet(std::move(modes));
}

}  // namespace slitflow
