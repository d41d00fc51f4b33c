from buzzscope.nn.layers import Conv1dParams, conv1d_forward, conv1d_backward
from buzzscope.nn.layers import maxpool1d, maxpool1d_backward, upsample1d_nearest, upsample1d_backward
from buzzscope.nn.layers import concat_channels, concat_backward, relu, relu_backward, sigmoid, sigmoid_backward
from buzzscope.nn.layers import check_finite
from buzzscope.nn.loss import dice_loss, DICE_SMOOTH
from buzzscope.nn.optim import AdamState, adam_step
