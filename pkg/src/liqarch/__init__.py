"""Package for liquidity-adjusted ARMA-GARCH modelling of minute-level
returns.

Minute returns are rescaled by their liquidity (relative absolute
return over relative traded amount), compounded into daily returns and
compared with the regular daily returns through rolling-window
ARMA-GARCH fits, t-tests and mean-variance portfolios.

See liqarch.pipeline for the end-to-end stages.
"""

from liqarch.backtest import WindowSpec, fit_windows
from liqarch.config import RunConfig
from liqarch.econometrics import fit_arma_garch
from liqarch.liquidity import compute_daily_records
from liqarch.marketdata import make_venue, parse_minute_csv, partition_days
