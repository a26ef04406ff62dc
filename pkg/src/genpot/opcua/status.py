"""OPC UA status codes used by the server."""

Good = 0x00000000
BadUnexpectedError = 0x80010000
BadInternalError = 0x80020000
BadDecodingError = 0x80070000
BadEncodingLimitsExceeded = 0x80080000
BadServiceUnsupported = 0x800B0000
BadNothingToDo = 0x800F0000
BadTooManyOperations = 0x80100000
BadSecureChannelIdInvalid = 0x80220000
BadSessionIdInvalid = 0x80250000
BadSessionClosed = 0x80260000
BadSessionNotActivated = 0x80270000
BadIdentityTokenInvalid = 0x80200000
BadIdentityTokenRejected = 0x80210000
BadNodeIdUnknown = 0x80340000
BadAttributeIdInvalid = 0x80350000
BadIndexRangeInvalid = 0x80360000
BadNotReadable = 0x803A0000
BadNotWritable = 0x803B0000
BadSecurityPolicyRejected = 0x80550000
BadTypeMismatch = 0x80740000
BadTcpMessageTypeInvalid = 0x807E0000
BadTcpSecureChannelUnknown = 0x807F0000
BadTcpMessageTooLarge = 0x80800000
BadTcpInternalError = 0x80820000
BadTcpEndpointUrlInvalid = 0x80830000
BadSecurityChecksFailed = 0x80130000
BadProtocolVersionUnsupported = 0x80BE0000
BadViewIdUnknown = 0x806B0000
BadBrowseDirectionInvalid = 0x804D0000
BadReferenceTypeIdInvalid = 0x804C0000
BadTimestampsToReturnInvalid = 0x802B0000
BadTooManySessions = 0x80560000
BadResponseTooLarge = 0x80B90000
BadSecurityModeRejected = 0x80540000
BadRequestTypeInvalid = 0x80530000

NAMES = {v: k for k, v in dict(globals()).items() if isinstance(v, int) and (k.startswith("Bad") or k == "Good")}


def name(code: int) -> str:
    return NAMES.get(code, f"0x{code:08X}")


def is_good(code: int) -> bool:
    return code & 0xC0000000 == 0
