"""Inter-transaction time analysis toolkit."""
