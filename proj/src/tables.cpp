#include "asnn/tables.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace asnn {

namespace {

const std::vector<GridRow> kGrid2Layer = {
    {{256, 256}, {0.9828, 0.9832, 0.9818, 0.9825, 0.9822, 0.9810, 0.9846, 0.9817, 0.9833, 0.9850}, 0.98281},
    {{256, 128}, {0.9816, 0.9834, 0.9836, 0.9824, 0.9829, 0.9831, 0.9805, 0.9828, 0.9832, 0.9822}, 0.98257},
    {{256, 64}, {0.9820, 0.9827, 0.9834, 0.9826, 0.9830, 0.9832, 0.9824, 0.9818, 0.9833, 0.9837}, 0.98281},
    {{256, 32}, {0.9840, 0.9823, 0.9835, 0.9814, 0.9830, 0.9826, 0.9816, 0.9831, 0.9840, 0.9833}, 0.98288},
    {{256, 16}, {0.9835, 0.9834, 0.9836, 0.9837, 0.9823, 0.9824, 0.9843, 0.9830, 0.9825, 0.9823}, 0.98310},
    {{128, 256}, {0.9811, 0.9793, 0.9787, 0.9798, 0.9810, 0.9799, 0.9822, 0.9811, 0.9817, 0.9807}, 0.98055},
    {{128, 128}, {0.9806, 0.9805, 0.9804, 0.9787, 0.9801, 0.9823, 0.9816, 0.9800, 0.9816, 0.9796}, 0.98054},
    {{128, 64}, {0.9803, 0.9814, 0.9806, 0.9805, 0.9782, 0.9796, 0.9814, 0.9817, 0.9804, 0.9784}, 0.98025},
    {{128, 32}, {0.9806, 0.9812, 0.9790, 0.9796, 0.9811, 0.9813, 0.9808, 0.9792, 0.9804, 0.9783}, 0.98015},
    {{128, 16}, {0.9809, 0.9806, 0.9808, 0.9802, 0.9792, 0.9830, 0.9820, 0.9807, 0.9796, 0.9803}, 0.98073},
    {{64, 256}, {0.9741, 0.9720, 0.9762, 0.9748, 0.9744, 0.9747, 0.9758, 0.9747, 0.9753, 0.9754}, 0.97474},
    {{64, 128}, {0.9747, 0.9761, 0.9749, 0.9754, 0.9783, 0.9752, 0.9773, 0.9752, 0.9741, 0.9755}, 0.97567},
    {{64, 64}, {0.9753, 0.9788, 0.9791, 0.9759, 0.9754, 0.9761, 0.9764, 0.9778, 0.9746, 0.9769}, 0.97663},
    {{64, 32}, {0.9757, 0.9748, 0.9757, 0.9737, 0.9759, 0.9765, 0.9759, 0.9755, 0.9750, 0.9765}, 0.97552},
    {{64, 16}, {0.9748, 0.9763, 0.9762, 0.9768, 0.9756, 0.9754, 0.9786, 0.9764, 0.9755, 0.9762}, 0.97618},
    {{32, 256}, {0.9655, 0.9654, 0.9664, 0.9678, 0.9644, 0.9670, 0.9665, 0.9659, 0.9656, 0.9654}, 0.96599},
    {{32, 128}, {0.9629, 0.9629, 0.9663, 0.9636, 0.9677, 0.9641, 0.9656, 0.9651, 0.9670, 0.9653}, 0.96505},
    {{32, 64}, {0.9653, 0.9665, 0.9664, 0.9645, 0.9658, 0.9653, 0.9655, 0.9639, 0.9658, 0.9655}, 0.96545},
    {{32, 32}, {0.9643, 0.9639, 0.9647, 0.9639, 0.9656, 0.9662, 0.9676, 0.9658, 0.9640, 0.9632}, 0.96492},
    {{32, 16}, {0.9654, 0.9676, 0.9651, 0.9666, 0.9649, 0.9667, 0.9651, 0.9661, 0.9635, 0.9638}, 0.96548},
    {{16, 256}, {0.9477, 0.9474, 0.9492, 0.9436, 0.9494, 0.9402, 0.9428, 0.9498, 0.9436, 0.9441}, 0.94578},
    {{16, 128}, {0.9446, 0.9470, 0.9411, 0.9444, 0.9452, 0.9504, 0.9462, 0.9451, 0.9442, 0.9441}, 0.94523},
    {{16, 64}, {0.9470, 0.9441, 0.9472, 0.9440, 0.9492, 0.9439, 0.9438, 0.9437, 0.9494, 0.9456}, 0.94579},
    {{16, 32}, {0.9455, 0.9423, 0.9465, 0.9469, 0.9458, 0.9460, 0.9506, 0.9461, 0.9446, 0.9432}, 0.94575},
    {{16, 16}, {0.9483, 0.9509, 0.9483, 0.9484, 0.9475, 0.9427, 0.9513, 0.9446, 0.9523, 0.9474}, 0.94817},
};

const std::vector<GridRow> kGrid3Layer = {
    {{128, 128, 128}, {0.9798, 0.9818, 0.9812, 0.9802, 0.9815, 0.9824, 0.9815, 0.9817, 0.9814, 0.9825}, 0.98140},
    {{128, 128, 64}, {0.9814, 0.9797, 0.9814, 0.9816, 0.9821, 0.9820, 0.9819, 0.9815, 0.9819, 0.9816}, 0.98151},
    {{128, 128, 32}, {0.9811, 0.9817, 0.9803, 0.9817, 0.9812, 0.9779, 0.9821, 0.9828, 0.9812, 0.9802}, 0.98102},
    {{128, 128, 16}, {0.9817, 0.9823, 0.9824, 0.9809, 0.9825, 0.9829, 0.9812, 0.9800, 0.9816, 0.9816}, 0.98171},
    {{128, 64, 128}, {0.9809, 0.9805, 0.9802, 0.9828, 0.9816, 0.9810, 0.9814, 0.9801, 0.9813, 0.9817}, 0.98115},
    {{128, 64, 64}, {0.9816, 0.9806, 0.9805, 0.9801, 0.9795, 0.9805, 0.9819, 0.9812, 0.9792, 0.9799}, 0.98050},
    {{128, 64, 32}, {0.9807, 0.9811, 0.9827, 0.9804, 0.9817, 0.9806, 0.9814, 0.9820, 0.9802, 0.9795}, 0.98103},
    {{128, 64, 16}, {0.9838, 0.9805, 0.9804, 0.9813, 0.9797, 0.9808, 0.9799, 0.9809, 0.9815, 0.9821}, 0.98109},
    {{128, 32, 128}, {0.9794, 0.9797, 0.9803, 0.9817, 0.9796, 0.9806, 0.9791, 0.9804, 0.9788, 0.9811}, 0.98007},
    {{128, 32, 64}, {0.9790, 0.9795, 0.9789, 0.9804, 0.9797, 0.9792, 0.9799, 0.9773, 0.9790, 0.9780}, 0.97909},
    {{128, 32, 32}, {0.9803, 0.9803, 0.9810, 0.9805, 0.9804, 0.9782, 0.9802, 0.9803, 0.9804, 0.9784}, 0.98000},
    {{128, 32, 16}, {0.9800, 0.9794, 0.9810, 0.9788, 0.9809, 0.9792, 0.9809, 0.9805, 0.9814, 0.9799}, 0.98020},
    {{128, 16, 128}, {0.9785, 0.9776, 0.9774, 0.9792, 0.9772, 0.9803, 0.9788, 0.9781, 0.9771, 0.9786}, 0.97828},
    {{128, 16, 64}, {0.9790, 0.9768, 0.9773, 0.9779, 0.9784, 0.9760, 0.9781, 0.9771, 0.9774, 0.9783}, 0.97763},
    {{128, 16, 32}, {0.9779, 0.9771, 0.9776, 0.9769, 0.9793, 0.9796, 0.9759, 0.9786, 0.9777, 0.9781}, 0.97787},
    {{128, 16, 16}, {0.9759, 0.9779, 0.9771, 0.9789, 0.9783, 0.9803, 0.9788, 0.9783, 0.9782, 0.9760}, 0.97797},
    {{64, 128, 128}, {0.9797, 0.9784, 0.9782, 0.9774, 0.9782, 0.9766, 0.9763, 0.9776, 0.9765, 0.9769}, 0.97758},
    {{64, 128, 64}, {0.9771, 0.9760, 0.9778, 0.9766, 0.9772, 0.9765, 0.9766, 0.9790, 0.9786, 0.9781}, 0.97735},
    {{64, 128, 32}, {0.9776, 0.9786, 0.9770, 0.9774, 0.9795, 0.9788, 0.9757, 0.9782, 0.9791, 0.9767}, 0.97786},
    {{64, 128, 16}, {0.9779, 0.9758, 0.9776, 0.9759, 0.9783, 0.9778, 0.9796, 0.9781, 0.9786, 0.9771}, 0.97767},
    {{64, 64, 128}, {0.9751, 0.9764, 0.9769, 0.9765, 0.9790, 0.9759, 0.9758, 0.9773, 0.9753, 0.9763}, 0.97645},
    {{64, 64, 64}, {0.9775, 0.9774, 0.9771, 0.9773, 0.9766, 0.9791, 0.9761, 0.9787, 0.9772, 0.9760}, 0.97730},
    {{64, 64, 32}, {0.9767, 0.9780, 0.9761, 0.9768, 0.9763, 0.9769, 0.9749, 0.9771, 0.9759, 0.9757}, 0.97644},
    {{64, 64, 16}, {0.9751, 0.9753, 0.9740, 0.9764, 0.9771, 0.9773, 0.9767, 0.9770, 0.9749, 0.9757}, 0.97595},
    {{64, 32, 128}, {0.9755, 0.9770, 0.9748, 0.9751, 0.9766, 0.9749, 0.9742, 0.9753, 0.9750, 0.9744}, 0.97528},
    {{64, 32, 64}, {0.9738, 0.9753, 0.9758, 0.9739, 0.9757, 0.9747, 0.9758, 0.9730, 0.9717, 0.9746}, 0.97443},
    {{64, 32, 32}, {0.9747, 0.9730, 0.9735, 0.9755, 0.9756, 0.9733, 0.9735, 0.9762, 0.9745, 0.9736}, 0.97434},
    {{64, 32, 16}, {0.9743, 0.9735, 0.9738, 0.9762, 0.9748, 0.9753, 0.9762, 0.9768, 0.9756, 0.9749}, 0.97514},
    {{64, 16, 128}, {0.9721, 0.9706, 0.9705, 0.9732, 0.9712, 0.9713, 0.9727, 0.9715, 0.9736, 0.9705}, 0.97172},
    {{64, 16, 64}, {0.9706, 0.9713, 0.9716, 0.9724, 0.9720, 0.9700, 0.9724, 0.9711, 0.9720, 0.9713}, 0.97147},
    {{64, 16, 32}, {0.9727, 0.9720, 0.9700, 0.9710, 0.9704, 0.9742, 0.9723, 0.9730, 0.9717, 0.9732}, 0.97205},
    {{64, 16, 16}, {0.9701, 0.9731, 0.9736, 0.9701, 0.9724, 0.9710, 0.9726, 0.9721, 0.9711, 0.9736}, 0.97197},
    {{32, 128, 128}, {0.9701, 0.9723, 0.9691, 0.9675, 0.9676, 0.9685, 0.9707, 0.9690, 0.9703, 0.9719}, 0.96970},
    {{32, 128, 64}, {0.9698, 0.9672, 0.9697, 0.9694, 0.9679, 0.9704, 0.9689, 0.9682, 0.9708, 0.9711}, 0.96934},
    {{32, 128, 32}, {0.9711, 0.9682, 0.9685, 0.9674, 0.9694, 0.9690, 0.9697, 0.9708, 0.9690, 0.9703}, 0.96934},
    {{32, 128, 16}, {0.9713, 0.9700, 0.9668, 0.9691, 0.9696, 0.9693, 0.9720, 0.9706, 0.9702, 0.9696}, 0.96985},
    {{32, 64, 128}, {0.9648, 0.9676, 0.9705, 0.9700, 0.9632, 0.9676, 0.9680, 0.9670, 0.9667, 0.9643}, 0.96697},
    {{32, 64, 64}, {0.9681, 0.9686, 0.9668, 0.9645, 0.9666, 0.9669, 0.9695, 0.9668, 0.9684, 0.9651}, 0.96713},
    {{32, 64, 32}, {0.9644, 0.9658, 0.9663, 0.9655, 0.9649, 0.9692, 0.9687, 0.9694, 0.9678, 0.9684}, 0.96704},
    {{32, 64, 16}, {0.9667, 0.9677, 0.9663, 0.9626, 0.9657, 0.9682, 0.9683, 0.9668, 0.9679, 0.9707}, 0.96709},
    {{32, 32, 128}, {0.9623, 0.9637, 0.9654, 0.9650, 0.9643, 0.9614, 0.9651, 0.9637, 0.9656, 0.9642}, 0.96407},
    {{32, 32, 64}, {0.9644, 0.9652, 0.9628, 0.9641, 0.9650, 0.9656, 0.9645, 0.9639, 0.9647, 0.9651}, 0.96453},
    {{32, 32, 32}, {0.9649, 0.9656, 0.9648, 0.9634, 0.9643, 0.9636, 0.9647, 0.9641, 0.9646, 0.9638}, 0.96438},
    {{32, 32, 16}, {0.9678, 0.9632, 0.9639, 0.9656, 0.9644, 0.9653, 0.9674, 0.9673, 0.9650, 0.9651}, 0.96550},
    {{32, 16, 128}, {0.9588, 0.9586, 0.9605, 0.9611, 0.9601, 0.9623, 0.9595, 0.9586, 0.9619, 0.9612}, 0.96026},
    {{32, 16, 64}, {0.9635, 0.9587, 0.9608, 0.9621, 0.9583, 0.9608, 0.9596, 0.9612, 0.9606, 0.9595}, 0.96051},
    {{32, 16, 32}, {0.9624, 0.9634, 0.9631, 0.9607, 0.9617, 0.9582, 0.9593, 0.9582, 0.9616, 0.9605}, 0.96091},
    {{32, 16, 16}, {0.9617, 0.9567, 0.9614, 0.9616, 0.9596, 0.9615, 0.9598, 0.9643, 0.9576, 0.9603}, 0.96045},
    {{16, 128, 128}, {0.9501, 0.9470, 0.9471, 0.9522, 0.9450, 0.9478, 0.9532, 0.9519, 0.9514, 0.9529}, 0.94986},
    {{16, 128, 64}, {0.9497, 0.9517, 0.9470, 0.9501, 0.9527, 0.9510, 0.9538, 0.9446, 0.9493, 0.9468}, 0.94967},
    {{16, 128, 32}, {0.9503, 0.9493, 0.9513, 0.9516, 0.9562, 0.9487, 0.9501, 0.9535, 0.9496, 0.9528}, 0.95134},
    {{16, 128, 16}, {0.9473, 0.9504, 0.9507, 0.9515, 0.9558, 0.9513, 0.9464, 0.9490, 0.9455, 0.9488}, 0.94967},
    {{16, 64, 128}, {0.9544, 0.9504, 0.9489, 0.9476, 0.9497, 0.9510, 0.9494, 0.9487, 0.9461, 0.9490}, 0.94952},
    {{16, 64, 64}, {0.9439, 0.9490, 0.9513, 0.9538, 0.9491, 0.9514, 0.9452, 0.9473, 0.9496, 0.9481}, 0.94887},
    {{16, 64, 32}, {0.9465, 0.9487, 0.9504, 0.9474, 0.9506, 0.9489, 0.9560, 0.9483, 0.9526, 0.9527}, 0.95021},
    {{16, 64, 16}, {0.9465, 0.9499, 0.9505, 0.9504, 0.9414, 0.9492, 0.9525, 0.9423, 0.9467, 0.9499}, 0.94793},
    {{16, 32, 128}, {0.9493, 0.9495, 0.9491, 0.9486, 0.9491, 0.9435, 0.9458, 0.9458, 0.9468, 0.9435}, 0.94710},
    {{16, 32, 64}, {0.9431, 0.9436, 0.9454, 0.9451, 0.9519, 0.9434, 0.9435, 0.9468, 0.9448, 0.9482}, 0.94558},
    {{16, 32, 32}, {0.9428, 0.9487, 0.9473, 0.9458, 0.9489, 0.9492, 0.9509, 0.9456, 0.9460, 0.9398}, 0.94650},
    {{16, 32, 16}, {0.9410, 0.9487, 0.9382, 0.9459, 0.9394, 0.9438, 0.9493, 0.9477, 0.9454, 0.9468}, 0.94462},
    {{16, 16, 128}, {0.9397, 0.9425, 0.9349, 0.9353, 0.9338, 0.9458, 0.9447, 0.9397, 0.9396, 0.9393}, 0.93953},
    {{16, 16, 64}, {0.9383, 0.9408, 0.9425, 0.9440, 0.9443, 0.9363, 0.9337, 0.9419, 0.9403, 0.9331}, 0.93952},
    {{16, 16, 32}, {0.9465, 0.9457, 0.9393, 0.9424, 0.9401, 0.9354, 0.9364, 0.9344, 0.9422, 0.9436}, 0.94060},
    {{16, 16, 16}, {0.9347, 0.9397, 0.9338, 0.9356, 0.9364, 0.9396, 0.9416, 0.9389, 0.9372, 0.9388}, 0.93763},
};

}  // namespace

const std::vector<GridRow>& grid_2layer() { return kGrid2Layer; }
const std::vector<GridRow>& grid_3layer() { return kGrid3Layer; }

const std::vector<GridRow>& embedded_grid(std::size_t depth) {
    if (depth == 2) return kGrid2Layer;
    if (depth == 3) return kGrid3Layer;
    throw std::invalid_argument("embedded_grid: depth must be 2 or 3");
}

TableVerification verify_grid(const std::vector<GridRow>& grid, std::size_t depth,
                              double tolerance) {
    TableVerification report;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& row = grid[i];
        const double recomputed =
            std::accumulate(row.accuracies.begin(), row.accuracies.end(), 0.0) /
            static_cast<double>(row.accuracies.size());
        ++report.rows_checked;
        if (std::abs(row.stored_mean - recomputed) > tolerance) {
            report.mismatches.push_back({depth, i, row.stored_mean, recomputed});
        }
    }
    return report;
}

TableVerification verify_embedded_tables(double tolerance) {
    TableVerification report = verify_grid(kGrid2Layer, 2, tolerance);
    TableVerification three = verify_grid(kGrid3Layer, 3, tolerance);
    report.rows_checked += three.rows_checked;
    report.mismatches.insert(report.mismatches.end(), three.mismatches.begin(),
                             three.mismatches.end());
    return report;
}

std::string format_verification(const TableVerification& report) {
    std::ostringstream out;
    out << "rows checked: " << report.rows_checked << "\n";
    if (report.ok()) {
        out << "all row means verified\n";
        return out.str();
    }
    for (const auto& m : report.mismatches) {
        char line[160];
        std::snprintf(line, sizeof(line),
                      "mismatch: grid=%zu-layer row=%zu stored=%.5f recomputed=%.5f\n",
                      m.table, m.row, m.stored_mean, m.recomputed_mean);
        out << line;
    }
    return out.str();
}

std::vector<TrialResult> grid_to_trials(const std::vector<GridRow>& grid) {
    std::vector<TrialResult> trials;
    trials.reserve(grid.size());
    for (const auto& row : grid) {
        TrialResult t{Architecture(row.widths), row.accuracies, 0.0};
        t.mean = std::accumulate(row.accuracies.begin(), row.accuracies.end(), 0.0) /
                 static_cast<double>(row.accuracies.size());
        trials.push_back(std::move(t));
    }
    return trials;
}

}  // namespace asnn
