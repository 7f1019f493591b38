/** Chart configuration for the evolution chart.
 *
 * The datasets carry the /api/series payload values verbatim (the chart never
 * aggregates anything itself). With two metrics, each gets its own y-axis,
 * left and right, scaled independently; the x-axis stays hidden and hover
 * tooltips show the ISO timestamp. */
const SERIES_COLORS = ["#2f6fde", "#d64550"];
const AXIS_IDS = ["yLeft", "yRight"];
export function chartDatasets(seriesList) {
    if (seriesList.length > 2) {
        throw new Error("the chart supports at most two metrics");
    }
    return seriesList.map((series, i) => ({
        label: series.metric,
        yAxisID: AXIS_IDS[i],
        data: series.points.map((p) => ({ x: Date.parse(p.t), y: p.value })),
        borderColor: SERIES_COLORS[i],
        backgroundColor: SERIES_COLORS[i],
        pointRadius: 0,
        spanGaps: false,
    }));
}
export function chartScales(seriesList) {
    const scales = {};
    seriesList.slice(0, 2).forEach((series, i) => {
        scales[AXIS_IDS[i]] = {
            type: "linear",
            position: i === 0 ? "left" : "right",
            display: true,
            grid: { drawOnChartArea: i === 0 },
            title: { display: true, text: series.metric },
        };
    });
    return scales;
}
