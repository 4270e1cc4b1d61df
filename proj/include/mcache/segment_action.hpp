#pragma once

namespace mcache {

/// Downlink control for one segment: transmit power and symbol count.
/// Symbols are continuous; zero symbols means the segment is not sent.
struct SegmentAction {
    double power = 0.0;    // watts
    double symbols = 0.0;  // count

    bool transmits() const { return symbols > 0.0; }
};

}  // namespace mcache
