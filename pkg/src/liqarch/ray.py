from typing import List, Sequence, Tuple, Union

from numpy import ndarray
import ray  # type: ignore

from liqarch.backtest import (
    Orders,
    WindowFit,
    WindowRunner,
    WindowSpec,
    fit_window_chunk,
)


class RayWindowRunner(WindowRunner):
    """Implements WindowRunner by fitting chunks of windows as ray tasks."""

    def __init__(self, chunk_size: int = 16, max_inflight_tasks: int = 64) -> None:
        """
        chunk_size:
            Number of windows each task fits. Larger chunks mean fewer
            tasks but coarser load balancing.
        max_inflight_tasks:
            Upper bound on submitted tasks whose results have not yet
            been collected.
        """
        super().__init__(chunk_size)
        self.max_inflight_tasks = max_inflight_tasks

    def fit_windows(
        self,
        regular: ndarray,
        adjusted: ndarray,
        windows: Sequence[Tuple[int, int]],
        spec: WindowSpec,
        orders: Orders,
    ) -> List[Tuple[WindowFit, WindowFit]]:
        fit_chunk = ray.remote(fit_window_chunk)
        regular_ref = ray.put(regular)
        adjusted_ref = ray.put(adjusted)
        windows_ref = ray.put(list(windows))
        futures: List[Union[ray._raylet.ObjectRef, ray._raylet.ObjectRefGenerator]] = []
        results = []
        for chunk_index in range(0, len(windows), self.chunk_size):
            if len(futures) >= self.max_inflight_tasks:
                ready_refs, futures = ray.wait(futures)
                results += ray.get(ready_refs)
            chunk_future = fit_chunk.remote(
                regular=regular_ref,
                adjusted=adjusted_ref,
                windows=windows_ref,
                spec=spec,
                orders=orders,
                chunk_size=self.chunk_size,
                chunk_index=chunk_index,
            )
            futures.append(chunk_future)
        results += ray.get(futures)
        results.sort(key=lambda result: result[0])  # by chunk index
        return [fits for _, chunk in results for fits in chunk]


def make_ray_runner(threads: int) -> RayWindowRunner:
    """Starts ray with `threads` CPUs unless it is already running."""
    if not ray.is_initialized():
        ray.init(num_cpus=threads, include_dashboard=False, log_to_driver=False)
    return RayWindowRunner()
