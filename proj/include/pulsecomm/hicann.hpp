// hicann.hpp
//  HICANN endpoint. In loopback mode every downstream pulse is sent back
//  upstream with its label unchanged and a fresh 15-bit record timestamp
//  taken on the 4 ns HICANN clock. In BEG mode a background event generator
//  feeds the upstream merger queue directly.
#ifndef PULSECOMM_HICANN_HPP
#define PULSECOMM_HICANN_HPP

#include <cstdint>

#include "pulsecomm/link.hpp"
#include "pulsecomm/spikegen.hpp"

namespace pulsecomm
{

enum class HicannMode
{
    off,
    loopback,
    beg,
};

const char *mode_name(HicannMode mode);

struct HicannConfig
{
    HicannMode mode{HicannMode::off};
    std::int64_t loopback_latency_ns{0};
    std::uint16_t beg_label9{0};
    SpikeTrain beg_train; // spike times in biological ms
};

void validate(const HicannConfig &config);

class HicannNode
{
public:
    HicannNode(Engine &engine, std::uint8_t index, const HicannConfig &config,
            UpstreamChannel &upstream, GroundTruthLog *log);
    HicannNode(const HicannNode &) = delete;
    HicannNode &operator=(const HicannNode &) = delete;

    // Schedules the BEG train; no-op in other modes
    void start();
    // Downstream delivery at engine.now()
    void on_downstream_arrival(const InFlightPulse &pulse);

    [[nodiscard]] std::uint8_t index() const { return index_; }
    [[nodiscard]] std::uint64_t received() const { return received_; }
    [[nodiscard]] std::uint64_t emitted() const { return emitted_; }

private:
    void emit(std::uint16_t label9, std::uint64_t pulse_id);
    void schedule_beg(std::size_t k);

    Engine &engine_;
    std::uint8_t index_;
    HicannConfig config_;
    UpstreamChannel &upstream_;
    GroundTruthLog *log_;
    std::uint64_t received_{0};
    std::uint64_t emitted_{0};
};

} // namespace pulsecomm

#endif
